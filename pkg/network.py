"""
中继网络信号合成模块
源 → 中继（放大转发）→ 目的节点：物理路径逐步仿真与等效模型两种合成方式
"""
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from config import NOISE_LEVEL, UNITARY_TOL
from errors import ContractError, DomainError


@dataclass(frozen=True)
class NetworkParams:
    """
    功率分配与放大系数

    P0 = P/2，P_i = P/(2R)，c = sqrt(P_i/(P0+N0)) = sqrt(P/(R(P+2N0)))
    """
    relays: int
    total_power: float
    noise_level: float = NOISE_LEVEL

    def __post_init__(self):
        if self.relays < 1 or self.total_power <= 0 or self.noise_level <= 0:
            raise DomainError(f"invalid network parameters: {self}")

    @classmethod
    def from_snr_db(cls, snr_db, relays=2, noise_level=NOISE_LEVEL):
        """横轴 P/N0 (dB)：固定 N0，扫描总功率 P"""
        return cls(relays, noise_level * 10 ** (snr_db / 10), noise_level)

    @property
    def source_power(self):
        return self.total_power / 2

    @property
    def relay_power(self):
        return self.total_power / (2 * self.relays)

    @property
    def amplification(self):
        return float(np.sqrt(self.relay_power / (self.source_power + self.noise_level)))

    @property
    def signal_gain(self):
        """c·sqrt(P0·R)"""
        return self.amplification * np.sqrt(self.source_power * self.relays)


@dataclass(frozen=True)
class RelaySpec:
    """中继组合矩阵 A_i、B_i：一个为零矩阵，另一个为酉矩阵"""
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a_zero = not np.any(self.a)
        b_zero = not np.any(self.b)
        if a_zero == b_zero:
            raise DomainError("exactly one of A_i, B_i must be the zero matrix")
        m = self.b if a_zero else self.a
        if np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])) > 10 * UNITARY_TOL:
            raise DomainError("non-zero combining matrix must be unitary")

    @property
    def conjugating(self):
        """A_i = 0 时中继转发接收信号的共轭"""
        return not np.any(self.a)

    @property
    def effective(self):
        """Â_i"""
        return self.b if self.conjugating else self.a


def alamouti_relays():
    """两中继 Alamouti 组合：A1 = I, B1 = 0；A2 = 0, B2 = [[0,-1],[1,0]]"""
    zero = np.zeros((2, 2), dtype=complex)
    return (
        RelaySpec(np.eye(2, dtype=complex), zero),
        RelaySpec(zero, np.array([[0, -1], [1, 0]], dtype=complex)),
    )


def conjugate_mask(relays):
    return tuple(spec.conjugating for spec in relays)


def relay_process(spec, c, r):
    """x_i = c (A_i r_i + B_i r_i*)，r 可为 (..., R) 批量"""
    r = np.asarray(r, dtype=complex)
    return c * (r @ spec.a.T + r.conj() @ spec.b.T)


@dataclass(frozen=True)
class NoiseDraw:
    """
    一帧的噪声抽样，供两种合成路径共享

    u : (K+1, R_relays, R) 各中继接收噪声
    z : (K+1, R) 目的节点噪声
    """
    u: np.ndarray
    z: np.ndarray


def draw_noise(params, blocks, rng):
    """u_i, z ~ CN(0, N0 I)"""
    rng = np.random.default_rng(rng)
    r = params.relays
    scale = np.sqrt(params.noise_level / 2)

    def cn(shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    return NoiseDraw(u=cn((blocks, r, r)), z=cn((blocks, r)))


@dataclass(frozen=True)
class RxBlock:
    """单个接收块；g 与 noise_var 为 genie 诊断字段"""
    y: np.ndarray
    k: int
    g: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    noise_var: Optional[float] = None


@dataclass(frozen=True)
class RxFrame:
    """
    目的节点接收帧

    y         : (K+1, R) 接收向量 y[0..K]
    g, h      : (K+1, R) genie：RD 系数与级联信道
    noise_var : (K+1,) genie：σ²_w[k]
    """
    y: np.ndarray
    g: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    noise_var: Optional[np.ndarray] = None

    @property
    def blocks(self):
        return self.y.shape[0]

    @property
    def has_genie(self):
        return self.h is not None and self.noise_var is not None

    def without_genie(self):
        return replace(self, g=None, h=None, noise_var=None)

    def require_genie(self):
        if not self.has_genie:
            raise ContractError("coherent detection needs genie channel and noise data")


def network_code_matrices(relays, s):
    """
    分布式空时码 S[k] = [Â_1 ŝ_1 ... Â_R ŝ_R]，共轭中继取 ŝ = s*

    s : (K+1, R)，返回 (K+1, R, R)
    """
    s = np.asarray(s)
    cols = [(s.conj() if spec.conjugating else s) @ spec.effective.T for spec in relays]
    return np.stack(cols, axis=-1)


def equivalent_noise_var(params, g):
    """σ²_w[k] = N0 (1 + c² Σ|g_i[k]|²)"""
    c2 = params.amplification ** 2
    return params.noise_level * (1 + c2 * np.sum(np.abs(g) ** 2, axis=-1))


def _check_lengths(frame, trace, relays, params):
    if trace.blocks != frame.s.shape[0]:
        raise DomainError(f"trace covers {trace.blocks} blocks, frame has {frame.s.shape[0]} vectors")
    if len(relays) != params.relays or trace.relays != params.relays:
        raise DomainError("relay count mismatch between params, relays and trace")


def synthesize_physical(params, relays, frame, trace, seed=None, noise=None):
    """
    逐步仿真物理路径：
    r_i = sqrt(P0 R) q_i s + u_i；x_i = c (A_i r_i + B_i r_i*)；y = Σ g_i x_i + z

    Parameters:
    -----------
    params : NetworkParams
    relays : sequence of RelaySpec
    frame : TxFrame
    trace : ChannelTrace（块数与 frame.s 相同）
    seed : 随机种子（noise 为 None 时用于抽取噪声）
    noise : NoiseDraw，可选，给定时两种合成路径可精确对比

    Returns:
    --------
    RxFrame : 含 genie 字段
    """
    _check_lengths(frame, trace, relays, params)
    if noise is None:
        noise = draw_noise(params, frame.s.shape[0], seed)

    c = params.amplification
    amp = np.sqrt(params.source_power * params.relays)
    y = noise.z.copy()
    for i, spec in enumerate(relays):
        r_i = amp * trace.q[:, i, None] * frame.s + noise.u[:, i]
        y += trace.g[:, i, None] * relay_process(spec, c, r_i)

    h = trace.with_convention(conjugate_mask(relays)).h
    return RxFrame(y=y, g=trace.g, h=h, noise_var=equivalent_noise_var(params, trace.g))


def synthesize_equivalent(params, relays, frame, trace, seed=None, noise=None):
    """
    等效模型 y[k] = c sqrt(P0 R) S[k] h[k] + w[k]

    noise 给定时 w = c Σ g_i Â_i û_i + z（与物理路径共享噪声）；
    否则按 g 条件抽取 w ~ CN(0, σ²_w[k] I)
    """
    _check_lengths(frame, trace, relays, params)
    h = trace.with_convention(conjugate_mask(relays)).h
    code = network_code_matrices(relays, frame.s)
    noise_var = equivalent_noise_var(params, trace.g)

    if noise is None:
        rng = np.random.default_rng(seed)
        shape = frame.s.shape
        white = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
        w = np.sqrt(noise_var)[:, None] * white
    else:
        c = params.amplification
        w = noise.z.copy()
        for i, spec in enumerate(relays):
            u_hat = noise.u[:, i].conj() if spec.conjugating else noise.u[:, i]
            w += c * trace.g[:, i, None] * (u_hat @ spec.effective.T)

    y = params.signal_gain * np.einsum('kij,kj->ki', code, h) + w
    return RxFrame(y=y, g=trace.g, h=h, noise_var=noise_var)
