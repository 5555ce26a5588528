"""Dense kernels, reverse-mode gradients, gradient checking and Adam."""
from teg.numerics.checkpoint import load_checkpoint, save_checkpoint
from teg.numerics.gradcheck import grad_check
from teg.numerics.optim import AdamState, adam_step
from teg.numerics.params import ParamStore
from teg.numerics.rng import child_rng, child_seed
from teg.numerics.tensor import NonFiniteError, ShapeError, Tensor, backward

KERNELS = (
    "matmul", "add", "sub", "scale", "mul", "concat", "row_sum", "row_mean",
    "square", "pairwise_sqdist", "relu", "silu", "dropout", "log_softmax", "nll",
    "gather_rows", "scatter_rows", "sparse_matmul",
)


def tensor_ops() -> dict:
    """Kernel catalog: name -> differentiable function."""
    from teg.numerics import tensor

    return {name: getattr(tensor, name) for name in KERNELS}


__all__ = [
    "AdamState",
    "KERNELS",
    "NonFiniteError",
    "ParamStore",
    "ShapeError",
    "Tensor",
    "adam_step",
    "backward",
    "child_rng",
    "child_seed",
    "grad_check",
    "load_checkpoint",
    "save_checkpoint",
    "tensor_ops",
]
