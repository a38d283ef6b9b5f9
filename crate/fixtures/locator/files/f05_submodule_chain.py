from torch import optim


def load_model_from_state_dict(state_dict, input_dim=None):
    model = optim.swa_utils.AveragedModel(SNN(input_dim=input_dim,
    num_hidden_units=hidden_dim))
    model.load_state_dict(state_dict, strict=True)
    return model
