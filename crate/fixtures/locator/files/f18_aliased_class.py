from torch.optim.swa_utils import AveragedModel as AM


def restore(net, sd):
    avg = AM(net)
    avg.load_state_dict(sd, assign=True)
    return avg
