"""Error models: per-assignment error expressions and their final reduction."""

from .approx_impls import APPROX_IMPLS, fast_exp, fast_log, fast_sqrt
from .base import (
    ApproxFunctionModel,
    ErrorModel,
    ErrorRegistry,
    NullModel,
    RegistryEntry,
    ShadowCastModel,
    TaylorModel,
    builtin_model,
)
from .user import UserModel, load_user_model

__all__ = [
    "APPROX_IMPLS",
    "ApproxFunctionModel",
    "ErrorModel",
    "ErrorRegistry",
    "NullModel",
    "RegistryEntry",
    "ShadowCastModel",
    "TaylorModel",
    "UserModel",
    "builtin_model",
    "fast_exp",
    "fast_log",
    "fast_sqrt",
    "load_user_model",
]
