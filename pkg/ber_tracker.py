"""
误码统计模块
累计误比特、计算 BER 与 95% 置信半宽、结果 CSV 读写
"""
import os
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from config import CSV_COLUMNS, CSV_FLOAT_FORMAT, Z_95
from errors import DomainError, ResultIOError


@dataclass(frozen=True)
class BerPoint:
    """单个 P/N0 点的仿真结果"""
    snr_db: float
    detector: str
    case: str
    bits: int
    errors: int
    ber: float
    ci95: float
    blocks: int
    capped: bool
    seed: int
    wall_time: float = 0.0

    def as_row(self):
        row = asdict(self)
        return {col: row[col] for col in CSV_COLUMNS}


def confidence_halfwidth(errors, bits, z=Z_95):
    """二项分布正态近似：z·sqrt(p(1-p)/n)"""
    if bits <= 0:
        return 0.0
    p = errors / bits
    return float(z * np.sqrt(p * (1 - p) / bits))


class ErrorCounter:
    """按分片累加 (bits, errors, blocks)"""

    def __init__(self):
        self.bits = 0
        self.errors = 0
        self.blocks = 0
        self.shards = 0

    def add(self, bits, errors, blocks):
        if bits < 0 or errors < 0 or errors > bits:
            raise DomainError(f"invalid shard counts: bits={bits}, errors={errors}")
        self.bits += int(bits)
        self.errors += int(errors)
        self.blocks += int(blocks)
        self.shards += 1

    def count(self, sent_bits, decided_bits):
        """比较两组比特矩阵并累加"""
        sent_bits = np.asarray(sent_bits)
        decided_bits = np.asarray(decided_bits)
        if sent_bits.shape != decided_bits.shape:
            raise DomainError(f"bit shape mismatch {sent_bits.shape} vs {decided_bits.shape}")
        errors = int(np.count_nonzero(sent_bits != decided_bits))
        self.add(sent_bits.size, errors, sent_bits.shape[0])
        return errors

    @property
    def ber(self):
        return self.errors / self.bits if self.bits else 0.0

    def reached(self, min_errors):
        return self.errors >= min_errors

    def __repr__(self):
        return f"ErrorCounter({self.errors}/{self.bits} bits, {self.blocks} blocks)"


def make_ber_point(counter, snr_db, detector, case, seed, capped=False, wall_time=0.0):
    return BerPoint(
        snr_db=float(snr_db),
        detector=detector,
        case=case,
        bits=counter.bits,
        errors=counter.errors,
        ber=counter.ber,
        ci95=confidence_halfwidth(counter.errors, counter.bits),
        blocks=counter.blocks,
        capped=bool(capped),
        seed=int(seed),
        wall_time=float(wall_time),
    )


def points_to_frame(points):
    return pd.DataFrame([p.as_row() for p in points], columns=CSV_COLUMNS)


def emit_csv(points, path):
    """
    写出结果 CSV：表头 + 每点一行，浮点数保留17位有效数字

    Parameters:
    -----------
    points : sequence of BerPoint
    path : str
        输出路径（目录不存在时自动创建）
    """
    path = str(path)
    df = points_to_frame(points)
    try:
        directory = os.path.dirname(path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    except OSError as e:
        raise ResultIOError(path, f"cannot write results: {e}") from e


def read_csv(path):
    """读取 emit_csv 写出的结果，返回 BerPoint 列表"""
    path = str(path)
    if not os.path.exists(path):
        raise ResultIOError(path, "result file not found")
    try:
        df = pd.read_csv(path, float_precision='round_trip',
                         dtype={'detector': str, 'case': str})
    except (OSError, ValueError) as e:
        raise ResultIOError(path, f"cannot parse results: {e}") from e
    missing = [c for c in CSV_COLUMNS if c not in df.columns]
    if missing:
        raise ResultIOError(path, f"missing columns {missing}")

    points = []
    for row in df.itertuples(index=False):
        capped = row.capped if isinstance(row.capped, (bool, np.bool_)) else str(row.capped) == 'True'
        points.append(BerPoint(
            snr_db=float(row.snr_db), detector=str(row.detector), case=str(row.case),
            bits=int(row.bits), errors=int(row.errors), ber=float(row.ber),
            ci95=float(row.ci95), blocks=int(row.blocks), capped=bool(capped), seed=int(row.seed),
        ))
    return points
