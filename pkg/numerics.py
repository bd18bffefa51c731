"""
数值计算模块
复数线性代数与特殊函数：J0、Toeplitz 展开、C^{-1} 的上三角 Cholesky 因子
"""
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.linalg import get_lapack_funcs, solve_triangular, toeplitz

from config import HERMITIAN_RTOL
from errors import DomainError, NotPositiveDefiniteError


def bessel_j0(x):
    """
    第一类零阶贝塞尔函数 J0

    Parameters:
    -----------
    x : float 或 ndarray
        自变量，必须为有限实数

    Returns:
    --------
    float 或 ndarray : J0(x)
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"bessel_j0 requires finite input, got {x!r}")
    value = special.j0(arr)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class HermitianToeplitz:
    """
    实对称 Toeplitz 矩阵，由第一行（各阶滞后值）完全确定
    """
    lags: tuple

    @property
    def dim(self):
        return len(self.lags)

    def dense(self):
        """展开为 N×N 矩阵，(i, j) 元素为 lags[|i-j|]"""
        return toeplitz(np.asarray(self.lags, dtype=float))


def toeplitz_from_lags(lags):
    """由滞后序列构造 Toeplitz 矩阵，lags[0] 必须为正"""
    values = tuple(float(v) for v in np.ravel(np.asarray(lags, dtype=float)))
    if len(values) == 0:
        raise DomainError("toeplitz_from_lags requires at least one lag")
    if not all(np.isfinite(values)):
        raise DomainError("toeplitz lags must be finite")
    if values[0] <= 0:
        raise DomainError(f"lag 0 must be strictly positive, got {values[0]}")
    return HermitianToeplitz(values)


def is_hermitian(a, rtol=HERMITIAN_RTOL):
    """A = A^H 是否在相对容差内成立"""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(np.linalg.norm(a), 1.0)
    return np.linalg.norm(a - a.conj().T) <= rtol * scale


def relative_frobenius(a, b):
    """‖A - B‖_F / ‖B‖_F"""
    b = np.asarray(b)
    return float(np.linalg.norm(np.asarray(a) - b) / np.linalg.norm(b))


def cholesky_upper_of_inverse(c):
    """
    计算 C^{-1} = U^H U 中的上三角因子 U

    不显式求逆：对翻转后的 J C J 做下三角 Cholesky 分解 J C J = L L^H，
    则 C = (J L J)(J L J)^H，U = (J L J)^{-1} = J L^{-1} J。

    Parameters:
    -----------
    c : HermitianToeplitz 或 ndarray
        Hermitian 正定矩阵

    Returns:
    --------
    ndarray : 上三角矩阵 U，对角元为正实数
    """
    a = c.dense() if isinstance(c, HermitianToeplitz) else np.asarray(c)
    if not is_hermitian(a):
        raise DomainError("cholesky_upper_of_inverse requires a Hermitian matrix")

    dtype = complex if np.iscomplexobj(a) else float
    n = a.shape[0]
    flipped = np.ascontiguousarray(a[::-1, ::-1], dtype=dtype)

    potrf, = get_lapack_funcs(('potrf',), (flipped,))
    low, info = potrf(flipped, lower=True, clean=True, overwrite_a=False)
    if info > 0:
        # info 为翻转顺序下的1起始主元位置
        raise NotPositiveDefiniteError(pivot=n - info)
    if info < 0:
        raise DomainError(f"potrf rejected argument {-info}")

    low_inv = solve_triangular(np.tril(low), np.eye(n, dtype=dtype), lower=True)
    return np.ascontiguousarray(low_inv[::-1, ::-1])
