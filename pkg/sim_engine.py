"""
BER 仿真引擎
按 (检测器, 衰落场景, P/N0) 扫描，每个点按分片并发仿真，直到满足停止规则
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from ber_tracker import ErrorCounter, emit_csv, make_ber_point, points_to_frame
from codebook import bits_to_indices, build_alamouti_codebook, differential_encode, indices_to_bits
from config import (
    DEFAULT_THREADS,
    DEFAULT_WINDOW,
    DETECTORS,
    MASTER_SEED,
    MAX_BLOCKS,
    MIN_BIT_ERRORS,
    MIN_REPORTED_ERRORS,
    ML_ORACLE_DRAWS,
    ML_ORACLE_MIN_DRAWS,
    MODULATIONS,
    NUM_RELAYS,
    OUTPUT_DIR,
    SHARD_BLOCKS,
    SNR_START,
    SNR_STEP,
    SNR_STOP,
)
from detectors import detect_stream_cdd, detect_stream_coherent, detect_stream_msdd
from errors import ConfigError, DomainError
from fading import DopplerSpec, generate_trace
from network import NetworkParams, alamouti_relays, conjugate_mask, network_code_matrices, synthesize_physical
from scenario_config import CASE_ALIASES, case_dopplers, resolve_case

logger = logging.getLogger(__name__)

_CASE_ORDER = ('I', 'II', 'III')


@dataclass(frozen=True)
class DetectorSpec:
    """检测器选择：kind ∈ coherent | cdd | msdd | msdsd | ml-oracle"""
    kind: str
    window: Optional[int] = None
    draws: Optional[int] = None

    @property
    def tag(self):
        if self.kind == 'ml-oracle':
            return f'ml-oracle:{self.window}:{self.draws}'
        if self.window is not None:
            return f'{self.kind}:{self.window}'
        return self.kind


def parse_detector(text):
    """
    解析检测器描述：coherent, cdd, msdd:N, msdsd:N, ml-oracle:N:draws
    msdd-exhaustive:N 与 msdd:N 等价；省略 N 时使用默认窗口
    """
    parts = str(text).strip().lower().split(':')
    kind = {'msdd-exhaustive': 'msdd'}.get(parts[0], parts[0])
    if kind not in DETECTORS:
        raise ConfigError(f"unknown detector {parts[0]!r}")
    try:
        args = [int(p) for p in parts[1:]]
    except ValueError:
        raise ConfigError(f"bad detector description {text!r}") from None

    if kind in ('coherent', 'cdd'):
        if args:
            raise ConfigError(f"detector {kind} takes no parameters: {text!r}")
        return DetectorSpec(kind)
    if kind in ('msdd', 'msdsd'):
        if len(args) > 1:
            raise ConfigError(f"bad detector description {text!r}")
        window = args[0] if args else DEFAULT_WINDOW
        if window < 2:
            raise ConfigError(f"window length must be >= 2: {text!r}")
        return DetectorSpec(kind, window)
    if kind == 'ml-oracle':
        if len(args) > 2:
            raise ConfigError(f"bad detector description {text!r}")
        window = args[0] if args else 3
        draws = args[1] if len(args) > 1 else ML_ORACLE_DRAWS
        if window < 2 or draws < ML_ORACLE_MIN_DRAWS:
            raise ConfigError(f"ml-oracle needs N >= 2 and draws >= {ML_ORACLE_MIN_DRAWS}: {text!r}")
        return DetectorSpec(kind, window, draws)


@dataclass
class ExperimentConfig:
    """
    一次扫描实验的完整配置

    cases 为场景名列表；同时给出 f_sr 与 f_rd 时改用自定义多普勒，场景标记为 'custom'
    """
    modulation: str = 'bpsk'
    detectors: List[str] = field(default_factory=lambda: ['cdd'])
    cases: List[str] = field(default_factory=lambda: ['I'])
    f_sr: Optional[float] = None
    f_rd: Optional[float] = None
    snr_start: float = SNR_START
    snr_stop: float = SNR_STOP
    snr_step: float = SNR_STEP
    min_errors: int = MIN_BIT_ERRORS
    max_blocks: int = MAX_BLOCKS
    seed: int = MASTER_SEED
    out: str = f'{OUTPUT_DIR}/ber.csv'
    threads: int = DEFAULT_THREADS
    shard_blocks: int = SHARD_BLOCKS
    relays: int = NUM_RELAYS
    skip: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        return cls(**values).validate()

    def validate(self):
        if self.modulation not in MODULATIONS:
            raise ConfigError(f"modulation must be one of {sorted(MODULATIONS)}, got {self.modulation!r}")
        if self.relays != NUM_RELAYS:
            raise ConfigError(f"only R={NUM_RELAYS} (Alamouti) is supported, got {self.relays}")
        if not self.detectors:
            raise ConfigError("no detector selected")
        for d in self.detectors:
            parse_detector(d)
        if (self.f_sr is None) != (self.f_rd is None):
            raise ConfigError("f_sr and f_rd must be given together")
        if self.f_sr is None:
            if not self.cases or any(resolve_case(c) is None for c in self.cases):
                raise ConfigError(f"cases must be drawn from {sorted(CASE_ALIASES)}, got {self.cases}")
        if self.snr_step <= 0 or self.snr_stop < self.snr_start:
            raise ConfigError("P/N0 grid needs step > 0 and stop >= start")
        if self.min_errors < MIN_REPORTED_ERRORS:
            raise ConfigError(f"min_errors must be >= {MIN_REPORTED_ERRORS}, got {self.min_errors}")
        if self.max_blocks < 1 or self.shard_blocks < 1 or self.threads < 1:
            raise ConfigError("max_blocks, shard_blocks and threads must be positive")
        try:
            self.scenarios()
        except DomainError as e:
            raise ConfigError(str(e)) from e
        return self

    @property
    def order(self):
        return MODULATIONS[self.modulation]

    def snr_grid(self):
        count = int(np.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return [round(self.snr_start + i * self.snr_step, 10) for i in range(count)]

    def scenarios(self):
        """返回 [(场景标记, 场景序号, DopplerSpec)]"""
        if self.f_sr is not None:
            return [('custom', 0, DopplerSpec(self.f_sr, self.f_rd, self.relays))]
        out = []
        for c in self.cases:
            tag = resolve_case(c)
            if tag in (s[0] for s in out):
                continue
            f_sr, f_rd = case_dopplers(tag)
            out.append((tag, _CASE_ORDER.index(tag) + 1, DopplerSpec(f_sr, f_rd, self.relays)))
        return out


def detect_frame(detector, rx, frame, cb, relays, params, dopplers, seed=None):
    """
    对一帧做检测，返回 K 个码字下标
    非相干检测器只看到去掉 genie 字段的接收帧
    """
    if detector.kind == 'coherent':
        code = network_code_matrices(relays, frame.s)
        return detect_stream_coherent(rx, code, cb, params)
    blind = rx.without_genie()
    if detector.kind == 'cdd':
        return detect_stream_cdd(blind, cb)
    return detect_stream_msdd(blind, cb, params, dopplers, detector.window, method=detector.kind,
                              draws=detector.draws or ML_ORACLE_DRAWS, seed=seed)


def simulate_shard(detector, cb, relays, params, dopplers, blocks, seed_seq):
    """
    仿真一个分片：随机比特 → 差分编码 → 衰落轨迹 → 物理路径合成 → 检测 → 计数

    各步骤使用 seed_seq 派生的独立子流：比特、信道、噪声、检测器

    Returns:
    --------
    tuple : (bits, errors, blocks)
    """
    bit_ss, trace_ss, noise_ss, detect_ss = seed_seq.spawn(4)
    rng = np.random.default_rng(bit_ss)
    sent = rng.integers(0, 2, size=(blocks, cb.bits_per_codeword), dtype=np.uint8)
    frame = differential_encode(cb, bits_to_indices(cb, sent))
    trace = generate_trace(dopplers, blocks + 1, trace_ss, conjugate=conjugate_mask(relays))
    rx = synthesize_physical(params, relays, frame, trace, seed=noise_ss)

    detect_seed = int(detect_ss.generate_state(1)[0])
    decisions = detect_frame(detector, rx, frame, cb, relays, params, dopplers, seed=detect_seed)
    counter = ErrorCounter()
    counter.count(sent, indices_to_bits(cb, decisions))
    return counter.bits, counter.errors, counter.blocks


class SimulationEngine:
    """BER 扫描引擎"""

    def __init__(self, config, show_progress=True):
        """
        Parameters:
        -----------
        config : ExperimentConfig
        show_progress : bool
            是否显示 tqdm 进度条
        """
        self.config = config.validate()
        self.show_progress = show_progress
        self.codebook = build_alamouti_codebook(config.order)
        self.relays = alamouti_relays()
        self.detectors = [parse_detector(d) for d in config.detectors]
        self.points = []

    def _tasks(self):
        skip = {(parse_detector(d).tag, resolve_case(c) or c) for d, c in self.config.skip}
        tasks = []
        for detector in self.detectors:
            for case, case_idx, dopplers in self.config.scenarios():
                if (detector.tag, case) in skip:
                    continue
                for snr_idx, snr_db in enumerate(self.config.snr_grid()):
                    tasks.append((detector, case, case_idx, dopplers, snr_idx, snr_db))
        return tasks

    def run_ber_sweep(self):
        """
        执行完整扫描

        分片种子为 SeedSequence([主种子, 场景序号, P/N0 序号, 分片序号])，与检测器无关，
        因此不同检测器看到相同的信道与噪声；停止规则按分片序号顺序判定，结果与线程数无关

        Returns:
        --------
        list of BerPoint
        """
        cfg = self.config
        tasks = self._tasks()
        logger.info("sweep: %d points, detectors=%s, modulation=%s",
                    len(tasks), [d.tag for d in self.detectors], cfg.modulation)
        self.points = []
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for task in tqdm(tasks, desc="仿真进度", disable=not self.show_progress):
                self.points.append(self._run_point(pool, *task))
        return self.points

    def _run_point(self, pool, detector, case, case_idx, dopplers, snr_idx, snr_db):
        cfg = self.config
        params = NetworkParams.from_snr_db(snr_db, cfg.relays)
        counter = ErrorCounter()
        start = time.perf_counter()
        shard_idx = 0
        assigned = 0
        done = False

        while not done and assigned < cfg.max_blocks:
            wave = []
            while len(wave) < cfg.threads and assigned < cfg.max_blocks:
                blocks = min(cfg.shard_blocks, cfg.max_blocks - assigned)
                seed_seq = np.random.SeedSequence([cfg.seed, case_idx, snr_idx, shard_idx])
                wave.append(pool.submit(simulate_shard, detector, self.codebook, self.relays,
                                        params, dopplers, blocks, seed_seq))
                assigned += blocks
                shard_idx += 1
            for future in wave:
                bits, errors, blocks = future.result()
                if done:
                    continue
                counter.add(bits, errors, blocks)
                done = counter.reached(cfg.min_errors)

        capped = not counter.reached(cfg.min_errors)
        point = make_ber_point(counter, snr_db, detector.tag, case, cfg.seed, capped=capped,
                               wall_time=time.perf_counter() - start)
        if capped:
            logger.warning("%s case %s @ %.1f dB capped at %d blocks with %d errors",
                           detector.tag, case, snr_db, counter.blocks, counter.errors)
        logger.info("%s case %s @ %.1f dB: BER=%.3e (%d/%d)",
                    detector.tag, case, snr_db, point.ber, point.errors, point.bits)
        return point

    def results_frame(self):
        return points_to_frame(self.points)

    def save_results(self, path=None):
        """写出 CSV"""
        path = path or self.config.out
        emit_csv(self.points, path)
        print(f"\n结果已保存: {path}")
        return path

    def print_summary(self):
        """打印扫描摘要"""
        if not self.points:
            return
        print("\n" + "=" * 60)
        print("BER 扫描摘要")
        print("=" * 60)
        print(f"{'调制':12s}: {self.config.modulation}")
        print(f"{'检测器':12s}: {', '.join(d.tag for d in self.detectors)}")
        print(f"{'点数':12s}: {len(self.points)}")
        print(f"{'截断点数':12s}: {sum(p.capped for p in self.points)}")
        print("=" * 60)
        df = self.results_frame()
        df['ber'] = df['ber'].map(lambda v: f"{v:.3e}")
        df['ci95'] = df['ci95'].map(lambda v: f"{v:.1e}")
        print(df.drop(columns=['seed']).to_string(index=False))
