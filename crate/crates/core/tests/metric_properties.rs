//! Metric exactness against brute-force and dynamic-programming oracles.

use apisync_core::metrics::{bleu, codebleu, pass_at_k, red, rouge_l, tokenize, BleuConfig, CodeBleuConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of k-subsets of n samples (the first c correct) holding at
/// least one correct sample, by enumeration.
fn pass_by_enumeration(n: u32, c: u32, k: u32) -> f64 {
    let correct_mask = (1u32 << c) - 1;
    let (mut hit, mut total) = (0u64, 0u64);
    for subset in 0u32..(1 << n) {
        if subset.count_ones() == k {
            total += 1;
            if subset & correct_mask != 0 {
                hit += 1;
            }
        }
    }
    hit as f64 / total as f64
}

#[test]
fn pass_at_k_matches_enumeration_for_small_n() {
    for n in 1..=10u32 {
        for c in 0..=n {
            for k in 1..=n {
                let got = pass_at_k(n as u64, c as u64, k as u64).unwrap();
                let want = pass_by_enumeration(n, c, k);
                assert!((got - want).abs() < 1e-12, "n={n} c={c} k={k}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn pass_at_k_reference_values() {
    assert!((pass_at_k(10, 3, 5).unwrap() - (1.0 - 21.0 / 252.0)).abs() < 1e-12);
    assert_eq!(pass_at_k(10, 5, 1).unwrap(), 0.5);
    assert_eq!(pass_at_k(5, 0, 3).unwrap(), 0.0);
    assert_eq!(pass_at_k(5, 5, 1).unwrap(), 1.0);
    assert!(pass_at_k(3, 4, 1).is_err());
    assert!(pass_at_k(3, 1, 0).is_err());
    assert!(pass_at_k(3, 1, 4).is_err());
}

#[test]
fn pass_at_k_large_counts_stay_consistent() {
    // beyond exact binomials: product form must agree with 1 - prod(1 - k/i)
    let (n, c, k) = (400u64, 37u64, 120u64);
    let got = pass_at_k(n, c, k).unwrap();
    let mut keep = 1.0f64;
    for i in (n - c + 1)..=n {
        keep *= 1.0 - k as f64 / i as f64;
    }
    assert!((got - (1.0 - keep)).abs() < 1e-12);
    let mut prev = 0.0;
    for k in 1..=n {
        let p = pass_at_k(n, c, k).unwrap();
        assert!(p + 1e-12 >= prev && p <= 1.0);
        prev = p;
    }
}

fn levenshtein_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            d[i][j] = if a[i - 1] == b[j - 1] { d[i - 1][j - 1] + 1 } else { d[i - 1][j].max(d[i][j - 1]) };
        }
    }
    d[a.len()][b.len()]
}

fn random_args(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &["x", "y", "data", "axis", "=", "None", "0", "1", ",", " ", "(", ")", "'a'", "é", "dtype", "strict=True"];
    let len = rng.gen_range(0..14);
    let body: String = (0..len).map(|_| PIECES[rng.gen_range(0..PIECES.len())]).collect();
    format!("({body})")
}

#[test]
fn red_and_rouge_match_oracles_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for _ in 0..100 {
        let a = random_args(&mut rng);
        let b = random_args(&mut rng);
        let longest = a.chars().count().max(b.chars().count());
        let want_red = levenshtein_oracle(&a, &b) as f64 / longest as f64;
        assert!((red(&a, &b) - want_red).abs() < 1e-12, "{a} | {b}");

        let (ta, tb) = (tokenize(&a), tokenize(&b));
        let want_rouge = lcs_oracle(&ta, &tb) as f64 / tb.len() as f64;
        assert!((rouge_l(&ta, &tb).unwrap() - want_rouge).abs() < 1e-12, "{a} | {b}");
    }
}

#[test]
fn bleu_hand_computed_example() {
    let c = tokenize("(data, axis=0, keepdims)");
    let r = tokenize("(data, axis=0, keepdims=True)");
    let score = bleu(&c, &r, &BleuConfig::default()).unwrap();
    // c = ( data , axis = 0 , keepdims ) -> 9 tokens; r adds "= True" -> 11 tokens
    assert_eq!(c.len(), 9);
    assert_eq!(r.len(), 11);
    // every candidate unigram occurs in the reference; each higher order
    // loses only the n-gram ending in "keepdims )"
    let p = [9.0 / 9.0, 7.0 / 8.0, 6.0 / 7.0, 5.0 / 6.0];
    let geo = (p.iter().map(|x: &f64| x.ln()).sum::<f64>() / 4.0).exp();
    let bp = (1.0 - 11.0 / 9.0f64).exp();
    assert!((score - bp * geo).abs() < 1e-12);
}

fn tokens_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["x", "y", "(", ")", ",", "=", "None", "axis", "0"]), 0..16)
        .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

proptest! {
    #[test]
    fn bleu_of_identical_sequences_is_one(r in tokens_strategy()) {
        prop_assume!(r.len() >= 4);
        prop_assert!((bleu(&r, &r, &BleuConfig::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lexical_metrics_are_bounded(c in tokens_strategy(), r in tokens_strategy()) {
        prop_assume!(!r.is_empty());
        let b = bleu(&c, &r, &BleuConfig::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        let rl = rouge_l(&c, &r).unwrap();
        prop_assert!((0.0..=1.0).contains(&rl));
        let (cs, rs) = (c.join(" "), r.join(" "));
        let d = red(&cs, &rs);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, red(&rs, &cs));
        let cb = codebleu(&cs, &rs, &CodeBleuConfig::default());
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&cb));
    }

    #[test]
    fn rouge_grows_with_candidate(c in tokens_strategy(), r in tokens_strategy(), extra in tokens_strategy()) {
        prop_assume!(!r.is_empty());
        let mut longer = c.clone();
        longer.extend(extra);
        prop_assert!(rouge_l(&longer, &r).unwrap() >= rouge_l(&c, &r).unwrap());
        prop_assert_eq!(rouge_l(&r, &r).unwrap(), 1.0);
    }

    #[test]
    fn pass_at_k_is_monotone(n in 1u64..60, c_frac in 0.0f64..=1.0, k_frac in 0.0f64..=1.0) {
        let c = ((n as f64) * c_frac) as u64;
        let k = (((n as f64) * k_frac) as u64).max(1);
        let p = pass_at_k(n, c, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        if k < n {
            prop_assert!(pass_at_k(n, c, k + 1).unwrap() + 1e-12 >= p);
        }
        if c < n {
            prop_assert!(pass_at_k(n, c + 1, k).unwrap() + 1e-12 >= p);
        }
    }

    #[test]
    fn red_is_zero_only_for_equal_strings(a in "[a-z(), =]{0,12}", b in "[a-z(), =]{0,12}") {
        prop_assert_eq!(red(&a, &b) == 0.0, a == b);
    }
}
