"""
酉码本模块
Alamouti 酉码字构造、Gray 比特映射、差分编码
"""
from dataclasses import dataclass

import numpy as np

from config import CODEWORD_MIN_DISTANCE, SUPPORTED_PSK_ORDERS, UNITARY_TOL
from errors import ConfigError, DomainError, SimulationError


def psk_points(order):
    """M-PSK 星座点 exp(j2πi/M), i = 0..M-1"""
    return np.exp(2j * np.pi * np.arange(order) / order)


def gray_encode(index):
    return index ^ (index >> 1)


def gray_decode(label):
    """Gray 标号 → 自然序号（支持数组）"""
    label = np.asarray(label)
    index = label.copy()
    shift = label >> 1
    while np.any(shift):
        index ^= shift
        shift = shift >> 1
    return index


@dataclass(frozen=True)
class UnitaryCodeword:
    """R×R 酉码字及其在码本中的下标"""
    matrix: np.ndarray
    index: int


@dataclass(frozen=True)
class Codebook:
    """
    酉码本

    matrices : (L, R, R) 码字矩阵，下标 l = i1·M + i2
    symbols  : (L, 2) 每个码字对应的 (u1, u2)
    """
    relays: int
    order: int
    matrices: np.ndarray
    symbols: np.ndarray

    @property
    def size(self):
        return self.matrices.shape[0]

    @property
    def bits_per_symbol(self):
        return int(np.log2(self.order))

    @property
    def bits_per_codeword(self):
        return 2 * self.bits_per_symbol

    @property
    def is_alamouti(self):
        return self.relays == 2

    def codeword(self, index):
        return UnitaryCodeword(self.matrices[index], int(index))

    def symbol_indices(self, index):
        """码字下标 → (i1, i2) PSK 序号"""
        index = np.asarray(index)
        return index // self.order, index % self.order

    def validate(self):
        """检查酉性与两两可区分"""
        eye = np.eye(self.relays)
        for v in self.matrices:
            if np.linalg.norm(v.conj().T @ v - eye) > UNITARY_TOL * 10 \
                    or np.linalg.norm(v @ v.conj().T - eye) > UNITARY_TOL * 10:
                raise SimulationError("codeword is not unitary")
        diff = self.matrices[:, None] - self.matrices[None, :]
        dist = np.linalg.norm(diff, axis=(2, 3))
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= CODEWORD_MIN_DISTANCE:
            raise SimulationError("codebook contains duplicate codewords")
        return self


def alamouti_matrix(u1, u2):
    """(1/√2)[[u1, -u2*], [u2, u1*]]，支持数组输入"""
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    m = np.empty(u1.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = u1
    m[..., 0, 1] = -u2.conj()
    m[..., 1, 0] = u2
    m[..., 1, 1] = u1.conj()
    return m / np.sqrt(2)


def build_alamouti_codebook(order):
    """
    构造 R=2 的 Alamouti 酉码本，L = M² 个码字

    Parameters:
    -----------
    order : int
        PSK 阶数 M ∈ {2, 4, 8, 16}
    """
    if order not in SUPPORTED_PSK_ORDERS:
        raise ConfigError(f"unsupported PSK order {order}, expected one of {SUPPORTED_PSK_ORDERS}")
    points = psk_points(order)
    i1, i2 = np.divmod(np.arange(order * order), order)
    symbols = np.stack([points[i1], points[i2]], axis=1)
    matrices = alamouti_matrix(symbols[:, 0], symbols[:, 1])
    return Codebook(relays=2, order=order, matrices=matrices, symbols=symbols).validate()


def _parse_bits(bits):
    if isinstance(bits, str):
        if any(c not in '01' for c in bits):
            raise DomainError(f"bit string may only contain 0/1, got {bits!r}")
        return np.array([int(c) for c in bits], dtype=np.uint8)
    arr = np.asarray(bits, dtype=np.uint8)
    if np.any(arr > 1):
        raise DomainError("bits must be 0 or 1")
    return arr


def bits_to_indices(cb, bits):
    """
    比特矩阵 (K, 2·log2 M) → 码字下标 (K,)
    前 log2 M 位映射 u1，后 log2 M 位映射 u2，各自独立 Gray 映射
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 2 or bits.shape[1] != cb.bits_per_codeword:
        raise DomainError(f"expected bit rows of width {cb.bits_per_codeword}, got shape {bits.shape}")
    m = cb.bits_per_symbol
    weights = 1 << np.arange(m - 1, -1, -1)
    label1 = bits[:, :m] @ weights
    label2 = bits[:, m:] @ weights
    return gray_decode(label1) * cb.order + gray_decode(label2)


def indices_to_bits(cb, indices):
    """码字下标 (K,) → 比特矩阵 (K, 2·log2 M)"""
    i1, i2 = cb.symbol_indices(np.asarray(indices, dtype=np.int64))
    m = cb.bits_per_symbol
    shifts = np.arange(m - 1, -1, -1)
    b1 = (gray_encode(i1)[:, None] >> shifts) & 1
    b2 = (gray_encode(i2)[:, None] >> shifts) & 1
    return np.concatenate([b1, b2], axis=1).astype(np.uint8)


def bits_to_codeword(cb, bits):
    """单个码字的比特串 → 码字"""
    arr = _parse_bits(bits)
    if arr.size != cb.bits_per_codeword:
        raise DomainError(f"expected {cb.bits_per_codeword} bits, got {arr.size}")
    return cb.codeword(int(bits_to_indices(cb, arr[None, :])[0]))


def codeword_to_bits(cb, index):
    """码字下标 → 比特串"""
    return ''.join(str(b) for b in indices_to_bits(cb, [index])[0])


@dataclass(frozen=True)
class TxFrame:
    """
    差分编码后的发送帧

    s        : (K+1, R) 发送向量 s[0..K]
    matrices : (K+1, R, R) 累积码字矩阵，matrices[0] = I，s[k] 为其第一列
    indices  : (K,) 第 1..K 块的码字下标
    """
    s: np.ndarray
    matrices: np.ndarray
    indices: np.ndarray

    @property
    def blocks(self):
        return self.indices.shape[0]


def differential_encode(cb, indices):
    """
    差分编码 s[k] = V[k] s[k-1]，s[0] = [1, 0, ..., 0]^t

    同时累积 S[k] = V[k] S[k-1]（S[0] = I），s[k] 即 S[k] 的第一列
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim != 1 or np.any(indices < 0) or np.any(indices >= cb.size):
        raise DomainError("codeword indices out of range")
    r = cb.relays
    acc = np.empty((indices.size + 1, r, r), dtype=complex)
    acc[0] = np.eye(r)
    current = acc[0]
    for k, idx in enumerate(indices, start=1):
        current = cb.matrices[idx] @ current
        acc[k] = current
    return TxFrame(s=acc[:, :, 0].copy(), matrices=acc, indices=indices)
