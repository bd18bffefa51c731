"""
时间相关瑞利衰落生成模块
按块生成 SR / RD 信道系数，自相关服从 Jakes 模型 J0(4π f n R)
"""
import logging
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from config import MAX_NORMALIZED_DOPPLER, SOS_SINUSOIDS
from errors import DomainError, ResultIOError
from numerics import bessel_j0

logger = logging.getLogger(__name__)

_CHUNK_BLOCKS = 1 << 16


@dataclass(frozen=True)
class DopplerSpec:
    """SR/RD 链路的最大归一化多普勒频率"""
    f_sr: float
    f_rd: float
    relays: int = 2

    def __post_init__(self):
        for name in ('f_sr', 'f_rd'):
            f = getattr(self, name)
            if not np.isfinite(f) or f < 0 or f > MAX_NORMALIZED_DOPPLER:
                raise DomainError(f"{name}={f} outside [0, {MAX_NORMALIZED_DOPPLER}]")
        if self.relays < 1:
            raise DomainError(f"relay count must be positive, got {self.relays}")

    def phi_sr(self, n):
        return jakes_autocorr(self.f_sr, n, self.relays)

    def phi_rd(self, n):
        return jakes_autocorr(self.f_rd, n, self.relays)

    def cascade_lags(self, n_lags):
        """级联信道自相关 φ_sr(n)·φ_rd(n), n = 0..n_lags-1"""
        n = np.arange(n_lags)
        return np.asarray(self.phi_sr(n)) * np.asarray(self.phi_rd(n))


@dataclass(frozen=True)
class ChannelTrace:
    """
    K 个块的信道系数

    q : (K, R) SR 系数 q_i[k]
    g : (K, R) RD 系数 g_i[k]
    h : (K, R) 级联信道，非共轭中继为 q·g，共轭中继为 q*·g
    """
    q: np.ndarray
    g: np.ndarray
    h: np.ndarray

    @property
    def blocks(self):
        return self.q.shape[0]

    @property
    def relays(self):
        return self.q.shape[1]

    def with_convention(self, conjugate):
        """按中继组合约定重新计算级联信道"""
        return ChannelTrace(self.q, self.g, cascade(self.q, self.g, conjugate))

    def processes(self):
        """按 q_1..q_R, g_1..g_R 顺序返回 2R 个过程，形状 (2R, K)"""
        return np.concatenate([self.q.T, self.g.T], axis=0)


def jakes_autocorr(f, n, relays):
    """
    Jakes 模型自相关 J0(4π f n R)，不同中继之间相关为0

    Parameters:
    -----------
    f : float
        最大归一化多普勒频率
    n : int 或 ndarray
        块间隔（非负）
    relays : int
        中继数 R（每块占用 2R 个信道使用）
    """
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError(f"lag must be non-negative, got {n!r}")
    return bessel_j0(4 * np.pi * f * n_arr * relays)


def cascade(q, g, conjugate=None):
    """级联信道 h_i = q_i g_i 或 q_i* g_i"""
    q = np.asarray(q)
    g = np.asarray(g)
    if conjugate is None:
        return q * g
    mask = np.asarray(conjugate, dtype=bool)
    return np.where(mask, q.conj(), q) * g


def _sos_process(rng, f, relays, blocks, sinusoids):
    """
    单个单位方差复高斯过程（随机相位/角度的正弦和，Zheng-Xiao 形式）
    f = 0 时退化为一次高斯抽样并保持不变
    """
    if f == 0:
        draw = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2)
        return np.full(blocks, draw, dtype=complex)

    # 每块推进 2R 个信道使用
    omega = 2 * np.pi * 2 * relays * f
    theta = rng.uniform(-np.pi, np.pi)
    phi = rng.uniform(-np.pi, np.pi, sinusoids)
    psi = rng.uniform(-np.pi, np.pi, sinusoids)
    m = np.arange(1, sinusoids + 1)
    alpha = (2 * np.pi * m - np.pi + theta) / (4 * sinusoids)
    w_c = omega * np.cos(alpha)
    w_s = omega * np.sin(alpha)

    out = np.empty(blocks, dtype=complex)
    scale = np.sqrt(2.0 / sinusoids)
    for start in range(0, blocks, _CHUNK_BLOCKS):
        t = np.arange(start, min(start + _CHUNK_BLOCKS, blocks), dtype=float)[:, None]
        x_c = scale * np.cos(t * w_c + phi).sum(axis=1)
        x_s = scale * np.cos(t * w_s + psi).sum(axis=1)
        out[start:start + t.shape[0]] = (x_c + 1j * x_s) / np.sqrt(2)
    return out


def generate_trace(spec, blocks, seed, conjugate=None, sinusoids=SOS_SINUSOIDS):
    """
    生成 K 个块的信道轨迹

    Parameters:
    -----------
    spec : DopplerSpec
        多普勒参数
    blocks : int
        块数 K（>=1）
    seed : int 或 np.random.SeedSequence
        随机种子，相同种子产生逐位相同的轨迹
    conjugate : sequence of bool
        各中继是否为共轭组合（决定 h 的计算方式），None 表示全部非共轭
    sinusoids : int
        每个过程的正弦波数（>=16）

    Returns:
    --------
    ChannelTrace
    """
    if blocks < 1:
        raise DomainError(f"trace needs at least one block, got {blocks}")
    if sinusoids < 16:
        raise DomainError(f"at least 16 sinusoids per process required, got {sinusoids}")

    rng = np.random.default_rng(seed)
    r = spec.relays
    q = np.empty((blocks, r), dtype=complex)
    g = np.empty((blocks, r), dtype=complex)
    for i in range(r):
        q[:, i] = _sos_process(rng, spec.f_sr, r, blocks, sinusoids)
    for i in range(r):
        g[:, i] = _sos_process(rng, spec.f_rd, r, blocks, sinusoids)

    logger.debug("generated trace: K=%d, f_sr=%s, f_rd=%s", blocks, spec.f_sr, spec.f_rd)
    return ChannelTrace(q, g, cascade(q, g, conjugate))


def empirical_autocorr(x, max_lag):
    """归一化经验自相关 r[n] = Re mean(x[k+n] x*[k]) / mean|x|², n = 0..max_lag"""
    x = np.asarray(x)
    power = np.mean(np.abs(x) ** 2)
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for n in range(1, max_lag + 1):
        r[n] = np.mean(x[n:] * x[:-n].conj()).real / power
    return r


def dump_trace(trace, path):
    """
    保存信道轨迹（回归测试夹具）
    .npz 为二进制，其它后缀写 CSV：block, process, re, im
    """
    path = str(path)
    try:
        if path.endswith('.npz'):
            np.savez(path, q=trace.q, g=trace.g, h=trace.h)
            return
        k, r = trace.q.shape
        names = [f'q{i + 1}' for i in range(r)] + [f'g{i + 1}' for i in range(r)] \
            + [f'h{i + 1}' for i in range(r)]
        values = np.concatenate([trace.processes().T, trace.h], axis=1)
        df = pd.DataFrame({
            'block': np.repeat(np.arange(k), 3 * r),
            'process': np.tile(names, k),
            're': values.real.ravel(),
            'im': values.imag.ravel(),
        })
        df.to_csv(path, index=False, float_format='%.17g')
    except OSError as e:
        raise ResultIOError(path, f"cannot write trace: {e}") from e


def load_trace(path):
    """读取 dump_trace 保存的轨迹"""
    path = str(path)
    if not os.path.exists(path):
        raise ResultIOError(path, "trace file not found")
    try:
        if path.endswith('.npz'):
            with np.load(path) as data:
                return ChannelTrace(data['q'], data['g'], data['h'])
        df = pd.read_csv(path, float_precision='round_trip')
    except (OSError, ValueError, KeyError) as e:
        raise ResultIOError(path, f"cannot read trace: {e}") from e

    k = int(df['block'].max()) + 1
    values = (df['re'].to_numpy() + 1j * df['im'].to_numpy()).reshape(k, -1)
    r = values.shape[1] // 3
    return ChannelTrace(values[:, :r].copy(), values[:, r:2 * r].copy(), values[:, 2 * r:].copy())
