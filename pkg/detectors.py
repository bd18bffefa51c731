"""
目的节点检测算法
相干检测（基准）、两符号差分检测 CDD、多符号差分检测 MSDD（穷举 / 球形译码）、
蒙特卡洛精确 ML 预言机，以及按帧批量检测的封装
"""
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, eigh, toeplitz
from scipy.special import logsumexp

from config import (
    EXHAUSTIVE_BATCH_PATHS,
    EXHAUSTIVE_MAX_CANDIDATES,
    ML_ORACLE_DRAWS,
    ML_ORACLE_MAX_CANDIDATES,
    ML_ORACLE_MIN_DRAWS,
    TIE_RTOL,
)
from codebook import psk_points
from errors import ConfigError, ContractError, DomainError
from numerics import cholesky_upper_of_inverse, toeplitz_from_lags

logger = logging.getLogger(__name__)


# ==================== 相干检测与两符号差分检测 ====================

def detect_coherent(block, prev_code, cb, params):
    """
    相干检测：argmin_V ‖y - c sqrt(P0 R) V S[k-1] h‖²

    Parameters:
    -----------
    block : RxBlock
        必须带 genie 字段 h 与 noise_var
    prev_code : ndarray
        上一块的空时码矩阵 S[k-1]
    cb : Codebook
    params : NetworkParams
    """
    if block.h is None or block.noise_var is None:
        raise ContractError("coherent detection needs genie h and noise variance")
    ref = prev_code @ block.h
    cand = params.signal_gain * (cb.matrices @ ref)
    dist = np.sum(np.abs(block.y[None, :] - cand) ** 2, axis=1)
    return int(np.argmin(dist))


def detect_cdd(y_k, y_km1, cb):
    """两符号差分检测 argmin_V ‖y[k] - V y[k-1]‖，并列取最小下标"""
    cand = cb.matrices @ np.asarray(y_km1)
    dist = np.sum(np.abs(np.asarray(y_k)[None, :] - cand) ** 2, axis=1)
    return int(np.argmin(dist))


def detect_stream_cdd(rx, cb):
    """整帧 CDD，只读取 y，返回 K 个码字下标"""
    y = rx.y
    cand = np.einsum('lij,kj->kli', cb.matrices, y[:-1])
    dist = np.sum(np.abs(y[1:, None, :] - cand) ** 2, axis=2)
    return np.argmin(dist, axis=1)


def detect_stream_coherent(rx, code_matrices, cb, params):
    """整帧相干检测（genie：真实 h[k] 与 S[k-1]）"""
    rx.require_genie()
    ref = np.einsum('kij,kj->ki', code_matrices[:-1], rx.h[1:])
    cand = params.signal_gain * np.einsum('lij,kj->kli', cb.matrices, ref)
    dist = np.sum(np.abs(rx.y[1:, None, :] - cand) ** 2, axis=2)
    return np.argmin(dist, axis=1)


def cdd_effective_noise_power(params, dopplers):
    """
    两符号检测等效噪声每分量功率：2 E{σ²_w} + c² P0 R · 2(1 - φ_sr(1) φ_rd(1))
    第二项随发射功率增长，是高信噪比误码平台的来源
    """
    rho = float(dopplers.cascade_lags(2)[1])
    c2 = params.amplification ** 2
    return 2 * params.noise_level * (1 + c2 * params.relays) + params.signal_gain ** 2 * 2 * (1 - rho)


def error_floor_sir(dopplers):
    """P → ∞ 时 CDD 的信干比 1 / (2(1 - φ_sr(1) φ_rd(1)))"""
    rho = float(dopplers.cascade_lags(2)[1])
    return np.inf if rho >= 1 else 1.0 / (2 * (1 - rho))


# ==================== 协方差模型 ====================

@dataclass(frozen=True)
class CovarianceModel:
    """
    修正度量使用的平均协方差 C = c² P0 R C_h + N0 (1 + c² R) I_N 及 C^{-1} = U^H U
    """
    matrix: np.ndarray
    cascade_lags: np.ndarray
    upper: np.ndarray
    params: object
    dopplers: object

    @property
    def window_length(self):
        return self.matrix.shape[0]


def build_covariance(params, dopplers, n):
    """
    构造长度为 N 的窗口协方差模型

    Parameters:
    -----------
    params : NetworkParams
    dopplers : DopplerSpec
    n : int
        窗口长度 N
    """
    if n < 1:
        raise DomainError(f"window length must be positive, got {n}")
    lags = dopplers.cascade_lags(n)
    c2 = params.amplification ** 2
    row = c2 * params.source_power * params.relays * lags
    row[0] += params.noise_level * (1 + c2 * params.relays)
    cov = toeplitz_from_lags(row)
    # 有效的 J0 滞后且 N0 > 0 时不会失败
    upper = cholesky_upper_of_inverse(cov)
    return CovarianceModel(cov.dense(), lags, upper, params, dopplers)


# ==================== MSDD 度量 ====================

@dataclass(frozen=True)
class DetectionWindow:
    """N 个连续接收块，最后一块为参考块（S[N] = I）"""
    y: np.ndarray

    def __post_init__(self):
        if self.y.ndim != 2 or self.y.shape[0] < 2:
            raise DomainError(f"detection window needs N >= 2 blocks, got shape {self.y.shape}")

    @property
    def length(self):
        return self.y.shape[0]

    @property
    def reference(self):
        return self.length - 1


def _window_array(window):
    y = window.y if isinstance(window, DetectionWindow) else np.asarray(window, dtype=complex)
    if y.ndim != 2 or y.shape[0] < 2:
        raise DomainError(f"detection window needs N >= 2 blocks, got shape {y.shape}")
    return y


def _check_cov(y, cov):
    if cov.window_length != y.shape[0]:
        raise DomainError(f"covariance built for N={cov.window_length}, window has {y.shape[0]} blocks")


def code_from_candidate(cb, candidate):
    """
    候选码字序列 V[1..N-1] → 窗口内空时码 S[1..N]
    S[N] = I，S[n] = V[n]^H S[n+1]
    """
    candidate = np.asarray(candidate, dtype=np.int64)
    r = cb.relays
    code = np.empty((candidate.size + 1, r, r), dtype=complex)
    code[-1] = np.eye(r)
    for n in range(candidate.size - 1, -1, -1):
        code[n] = cb.matrices[candidate[n]].conj().T @ code[n + 1]
    return code


def msdd_metric(window, cov, cb, candidate):
    """
    修正 ML 度量：Σ_{n=1}^{N-1} ‖u_nn V[n] y[n] + S[n+1] Σ_{j>n} u_nj S^H[j] y[j]‖²
    （不含与候选无关的参考项 u_NN² ‖y[N]‖²）
    """
    y = _window_array(window)
    _check_cov(y, cov)
    u = cov.upper
    code = code_from_candidate(cb, candidate)
    n_blocks = y.shape[0]
    z = np.einsum('nji,nj->ni', code.conj(), y)
    total = 0.0
    for n in range(n_blocks - 2, -1, -1):
        ctx = code[n + 1] @ (u[n, n + 1:] @ z[n + 1:])
        vec = u[n, n] * (cb.matrices[candidate[n]] @ y[n]) + ctx
        total += float(np.sum(np.abs(vec) ** 2))
    return total


def quadratic_form_for_code(window, cov, code):
    """ȳ^H Σ̂^{-1} ȳ，Σ̂ = S̄ (C ⊗ I) S̄^H 显式构造（测试用）"""
    y = _window_array(window)
    r = y.shape[1]
    s_bar = block_diag(*code)
    sigma = s_bar @ np.kron(cov.matrix, np.eye(r)) @ s_bar.conj().T
    y_bar = y.reshape(-1)
    return float(np.real(y_bar.conj() @ np.linalg.solve(sigma, y_bar)))


def dense_quadratic_form(window, cov, cb, candidate):
    return quadratic_form_for_code(window, cov, code_from_candidate(cb, candidate))


def _tie_tolerance(metric, energy):
    return TIE_RTOL * (metric + energy)


def _window_energy(y, upper):
    return float(np.sum(np.diag(upper).real ** 2 * np.sum(np.abs(y) ** 2, axis=1)))


def _expand_levels(y, u, cb, levels, code, zs, partial, paths):
    """
    把一组路径按给定树层逐层展开为全部子路径

    code : (P, R, R) 当前层之上的 S，zs : (P, j, R) 已展开层的 S^H y，
    partial : (P,) 累计度量，paths : (P, t) 已选下标（按层 N-1 → 1 排列）
    """
    size = cb.size
    r = y.shape[1]
    v_h = cb.matrices.conj()
    for level in levels:
        acc = np.einsum('j,pjr->pr', u[level, level + 1:], zs)
        ctx = np.einsum('pij,pj->pi', code, acc)
        vec = u[level, level] * (cb.matrices @ y[level])[None, :, :] + ctx[:, None, :]
        inc = np.sum(np.abs(vec) ** 2, axis=2)
        n_paths = partial.size
        partial = (partial[:, None] + inc).reshape(-1)
        paths = np.concatenate([np.repeat(paths, size, axis=0),
                                np.tile(np.arange(size), n_paths)[:, None]], axis=1)
        if level == 0:
            break
        code = np.einsum('lji,pjk->plik', v_h, code).reshape(-1, r, r)
        new_z = np.einsum('qji,j->qi', code.conj(), y[level])
        zs = np.concatenate([new_z[:, None, :], np.repeat(zs, size, axis=0)], axis=1)
    return code, zs, partial, paths


def detect_msdd_exhaustive(window, cov, cb, batch_paths=EXHAUSTIVE_BATCH_PATHS):
    """
    穷举 MSDD：在 𝒱^{N-1} 上精确最小化修正度量，并列取字典序最小的下标向量

    上层逐个前缀枚举，下层每个前缀一次向量化展开（每批不超过 batch_paths 条路径），
    峰值内存由 batch_paths 限定
    """
    y = _window_array(window)
    _check_cov(y, cov)
    n_blocks, r = y.shape
    size = cb.size
    total = size ** (n_blocks - 1)
    if total > EXHAUSTIVE_MAX_CANDIDATES:
        raise ConfigError(f"exhaustive search over {total} candidates exceeds {EXHAUSTIVE_MAX_CANDIDATES}")

    u = cov.upper
    energy = _window_energy(y, u)
    levels = list(range(n_blocks - 2, -1, -1))
    span = 1
    while span < len(levels) and size ** (span + 1) <= batch_paths:
        span += 1
    head, tail = levels[:-span], levels[-span:]

    code, zs, partial, paths = _expand_levels(
        y, u, cb, head, np.eye(r, dtype=complex)[None], y[-1][None, None, :],
        np.zeros(1), np.zeros((1, 0), dtype=np.int64))

    best = np.inf
    tied = []
    for p in range(partial.size):
        _, _, sub_partial, sub_paths = _expand_levels(
            y, u, cb, tail, code[p:p + 1], zs[p:p + 1], partial[p:p + 1], paths[p:p + 1])
        batch_best = float(sub_partial.min())
        if batch_best > best + _tie_tolerance(best, energy):
            continue
        best = min(best, batch_best)
        limit = best + _tie_tolerance(best, energy)
        tied = [t for t in tied if t[0] <= limit]
        keep = sub_partial <= limit
        tied.extend((float(m), tuple(int(i) for i in path[::-1]))
                    for m, path in zip(sub_partial[keep], sub_paths[keep]))

    limit = best + _tie_tolerance(best, energy)
    return np.array(min(t for m, t in tied if m <= limit), dtype=np.int64)


# ==================== 球形译码 MSDSD ====================

@dataclass
class SearchStats:
    """球形译码诊断：展开节点数、到达叶子数、半径更新次数"""
    nodes: int = 0
    leaves: int = 0
    radius_updates: int = 0


@dataclass
class _SphereSearch:
    """
    深度优先树搜索（Schnorr-Euchner 顺序）
    层 n = N-1 → 1 逐项累加修正度量，子节点按增量升序访问，每到达叶子即收缩半径
    搜索状态只属于一次调用
    """
    y: np.ndarray
    upper: np.ndarray
    cb: object
    separable: bool = False
    stats: SearchStats = field(default_factory=SearchStats)

    def __post_init__(self):
        n, r = self.y.shape
        self.best = np.inf
        self.tied = []
        self.energy = _window_energy(self.y, self.upper)
        self.path = np.zeros(n - 1, dtype=np.int64)
        self.code = np.empty((n, r, r), dtype=complex)
        self.code[-1] = np.eye(r)
        self.z = np.empty((n, r), dtype=complex)
        self.z[-1] = self.y[-1]
        self.norms = np.sum(np.abs(self.y) ** 2, axis=1)

    def run(self):
        self._descend(self.y.shape[0] - 2, 0.0)
        limit = self.best + _tie_tolerance(self.best, self.energy)
        return np.array(min(p for m, p in self.tied if m <= limit), dtype=np.int64)

    def _increments(self, level, ctx):
        u_nn = self.upper[level, level]
        y_n = self.y[level]
        if not self.separable:
            vec = u_nn * (self.cb.matrices @ y_n) + ctx
            return np.sum(np.abs(vec) ** 2, axis=1)
        # Alamouti：增量对 u1、u2 可加分离，只需 2M 次标量运算
        points = psk_points(self.cb.order)
        a1 = ctx[0].conjugate() * y_n[0] + ctx[1] * y_n[1].conjugate()
        a2 = ctx[1].conjugate() * y_n[0] - ctx[0] * y_n[1].conjugate()
        f1 = np.real(points * a1) / np.sqrt(2)
        f2 = np.real(points * a2) / np.sqrt(2)
        base = u_nn ** 2 * self.norms[level] + np.sum(np.abs(ctx) ** 2)
        return (base + 2 * u_nn * (f1[:, None] + f2[None, :])).reshape(-1)

    def _descend(self, level, partial):
        self.stats.nodes += 1
        ctx = self.code[level + 1] @ (self.upper[level, level + 1:] @ self.z[level + 1:])
        inc = self._increments(level, ctx)
        for child in np.argsort(inc, kind='stable'):
            metric = partial + inc[child]
            if metric > self.best + _tie_tolerance(self.best, self.energy):
                break
            self.path[level] = child
            if level == 0:
                self._leaf(metric)
                continue
            s = self.cb.matrices[child].conj().T @ self.code[level + 1]
            self.code[level] = s
            self.z[level] = s.conj().T @ self.y[level]
            self._descend(level - 1, metric)

    def _leaf(self, metric):
        self.stats.leaves += 1
        if metric < self.best:
            self.best = metric
            self.stats.radius_updates += 1
            limit = metric + _tie_tolerance(metric, self.energy)
            self.tied = [t for t in self.tied if t[0] <= limit]
        self.tied.append((metric, tuple(int(i) for i in self.path)))


def detect_msdsd(window, cov, cb, return_stats=False):
    """
    多符号差分球形译码（联合搜索），输出与穷举 MSDD 相同

    Parameters:
    -----------
    window : DetectionWindow 或 (N, R) ndarray
    cov : CovarianceModel（窗口长度 N）
    cb : Codebook
    return_stats : bool
        是否同时返回 SearchStats

    Returns:
    --------
    ndarray : V[1..N-1] 的码字下标
    """
    y = _window_array(window)
    _check_cov(y, cov)
    search = _SphereSearch(y, cov.upper, cb)
    decision = search.run()
    return (decision, search.stats) if return_stats else decision


def detect_msdsd_alamouti(window, cov, cb, return_stats=False):
    """
    Alamouti 码的逐符号 MSDSD：每层增量分解为 u1、u2 两个独立的 PSK 判决项，
    子节点评分只需 2M 次运算，结果与联合搜索一致
    """
    if not cb.is_alamouti:
        raise ConfigError("per-symbol sphere search requires an Alamouti codebook")
    y = _window_array(window)
    _check_cov(y, cov)
    search = _SphereSearch(y, cov.upper, cb, separable=True)
    decision = search.run()
    return (decision, search.stats) if return_stats else decision


# ==================== 蒙特卡洛精确 ML 预言机 ====================

@dataclass(frozen=True)
class ExactCovariance:
    """给定 Ḡ 时 ȳ 的条件协方差 Σ_ȳ 及其组成 Σ_q̄、Σ_w̄"""
    sigma: np.ndarray
    sigma_q: np.ndarray
    sigma_w: np.ndarray


def _correlation_sqrt(lags):
    """Toeplitz 相关矩阵的平方根（允许半正定，f = 0 时为全1矩阵）"""
    w, v = eigh(toeplitz(lags))
    return v * np.sqrt(np.clip(w, 0, None))


def _exact_covariances(code, g, c_q, params):
    """
    批量条件协方差：Σ_ȳ = c² P0 R S̄ Ḡ Σ_q̄ Ḡ^H S̄^H + Σ_w̄

    code : (N, R, R)，g : (D, N, R)，返回 (D, NR, NR)
    """
    d, n, r = g.shape
    a = code[None, :, :, :] * g[:, :, None, :]
    sigma = params.signal_gain ** 2 * np.einsum('kl,dkim,dljm->dkilj', c_q, a, a.conj())
    sigma = sigma.reshape(d, n * r, n * r)
    noise_var = params.noise_level * (1 + params.amplification ** 2 * np.sum(np.abs(g) ** 2, axis=2))
    idx = np.arange(n * r)
    sigma[:, idx, idx] += np.repeat(noise_var, r, axis=1)
    return sigma


def exact_covariance(code, g, params, dopplers):
    """单次 Ḡ 实现下的条件协方差"""
    n, r = g.shape
    c_q = toeplitz(dopplers.phi_sr(np.arange(n)))
    sigma = _exact_covariances(code, g[None], c_q, params)[0]
    noise_var = params.noise_level * (1 + params.amplification ** 2 * np.sum(np.abs(g) ** 2, axis=1))
    return ExactCovariance(sigma=sigma, sigma_q=np.kron(c_q, np.eye(r)),
                           sigma_w=np.kron(np.diag(noise_var), np.eye(r)))


def draw_rd_gains(dopplers, n, relays, draws, rng):
    """按 φ_rd 时间相关抽取 Ḡ，形状 (draws, N, R)"""
    root = _correlation_sqrt(dopplers.phi_rd(np.arange(n)))
    white = (rng.standard_normal((draws, n, relays)) + 1j * rng.standard_normal((draws, n, relays))) / np.sqrt(2)
    return np.einsum('ij,djr->dir', root, white)


def averaged_log_likelihood(y, code, g_draws, c_q, params):
    """log E_Ḡ{p(ȳ | S̄, Ḡ)}，对数域平均"""
    sigma = _exact_covariances(code, g_draws, c_q, params)
    chol = np.linalg.cholesky(sigma)
    y_bar = y.reshape(-1)
    white = np.linalg.solve(chol, np.broadcast_to(y_bar, (sigma.shape[0], y_bar.size))[..., None])[..., 0]
    logdet = 2 * np.sum(np.log(np.real(np.diagonal(chol, axis1=1, axis2=2))), axis=1)
    log_pdf = -y_bar.size * np.log(np.pi) - logdet - np.sum(np.abs(white) ** 2, axis=1)
    return float(logsumexp(log_pdf) - np.log(g_draws.shape[0]))


def ml_oracle_mc(window, params, dopplers, cb, draws=ML_ORACLE_DRAWS, seed=None):
    """
    精确 ML 检测的蒙特卡洛近似：对 Ḡ 抽样求平均似然，取最大者
    所有候选共用同一组 Ḡ 抽样

    Parameters:
    -----------
    window : DetectionWindow 或 (N, R) ndarray
    params : NetworkParams
    dopplers : DopplerSpec
    cb : Codebook
    draws : int
        Ḡ 抽样数（>= 1000）
    seed : 随机种子
    """
    y = _window_array(window)
    n, r = y.shape
    total = cb.size ** (n - 1)
    if total > ML_ORACLE_MAX_CANDIDATES:
        raise ConfigError(f"ML oracle over {total} candidates exceeds {ML_ORACLE_MAX_CANDIDATES}")
    if draws < ML_ORACLE_MIN_DRAWS:
        raise ConfigError(f"ML oracle needs at least {ML_ORACLE_MIN_DRAWS} draws, got {draws}")

    rng = np.random.default_rng(seed)
    g_draws = draw_rd_gains(dopplers, n, r, draws, rng)
    c_q = toeplitz(dopplers.phi_sr(np.arange(n)))

    best, best_ll = None, -np.inf
    for candidate in itertools.product(range(cb.size), repeat=n - 1):
        ll = averaged_log_likelihood(y, code_from_candidate(cb, candidate), g_draws, c_q, params)
        if ll > best_ll:
            best, best_ll = candidate, ll
    return np.array(best, dtype=np.int64)


# ==================== 整帧 MSDD ====================

def window_bounds(blocks, n):
    """
    按重叠一块切分窗口：返回 (start, end) 列表，窗口覆盖 y[start..end]，
    判决 V[start+1..end]；末窗口可以更短（至少2块）
    """
    if n < 2:
        raise DomainError(f"window length must be >= 2, got {n}")
    bounds = []
    start = 0
    while start < blocks:
        end = min(start + n - 1, blocks)
        bounds.append((start, end))
        start = end
    return bounds


def detect_stream_msdd(rx, cb, params, dopplers, n, method='msdsd', draws=ML_ORACLE_DRAWS, seed=None,
                       separable=True):
    """
    整帧多符号检测

    Parameters:
    -----------
    rx : RxFrame（只读取 y）
    n : int
        窗口长度 N
    method : str
        'msdsd' | 'msdd' | 'ml-oracle'
    separable : bool
        Alamouti 码时是否使用逐符号球形译码

    Returns:
    --------
    ndarray : K 个码字下标
    """
    blocks = rx.y.shape[0] - 1
    decisions = np.empty(blocks, dtype=np.int64)
    cache = {}
    root = np.random.SeedSequence(seed)
    for w, (start, end) in enumerate(window_bounds(blocks, n)):
        y = rx.y[start:end + 1]
        length = y.shape[0]
        if method == 'ml-oracle':
            rng = np.random.default_rng(root.spawn(1)[0])
            decisions[start:end] = ml_oracle_mc(y, params, dopplers, cb, draws=draws, seed=rng)
            continue
        if length not in cache:
            cache[length] = build_covariance(params, dopplers, length)
        cov = cache[length]
        if method == 'msdd':
            decisions[start:end] = detect_msdd_exhaustive(y, cov, cb)
        elif method == 'msdsd':
            if separable and cb.is_alamouti:
                decisions[start:end] = detect_msdsd_alamouti(y, cov, cb)
            else:
                decisions[start:end] = detect_msdsd(y, cov, cb)
        else:
            raise ConfigError(f"unknown multiple-symbol method {method!r}")
    logger.debug("detected %d blocks with %s (N=%d)", blocks, method, n)
    return decisions
