import torch.optim.swa_utils as swa


def wrap(net):
    return swa.AveragedModel(net, use_buffers=True)
