#!/usr/bin/env python3
"""
D-DSTC BER 扫描命令行入口

用法示例：
    python run_sweep.py --modulation qpsk --detector cdd --detector msdsd:10 --case 3 --out ber.csv
    python run_sweep.py --config sweep.txt --threads 8

退出码：0 成功，1 配置错误，2 文件读写错误
"""
import logging
import os
import sys
from argparse import ArgumentParser

from errors import ConfigError, ResultIOError
from scenario_config import get_config
from sim_engine import ExperimentConfig, SimulationEngine

logger = logging.getLogger(__name__)

# 配置文件键 / 命令行参数 → ExperimentConfig 字段
_KEY_MAP = {
    'modulation': 'modulation',
    'detector': 'detectors',
    'case': 'cases',
    'fsr': 'f_sr',
    'frd': 'f_rd',
    'snr_start': 'snr_start',
    'snr_stop': 'snr_stop',
    'snr_step': 'snr_step',
    'min_errors': 'min_errors',
    'max_blocks': 'max_blocks',
    'seed': 'seed',
    'out': 'out',
    'threads': 'threads',
    'shard_blocks': 'shard_blocks',
}
_LIST_KEYS = ('detectors', 'cases')
_INT_KEYS = ('min_errors', 'max_blocks', 'seed', 'threads', 'shard_blocks')
_FLOAT_KEYS = ('f_sr', 'f_rd', 'snr_start', 'snr_stop', 'snr_step')


class _Parser(ArgumentParser):
    """参数错误按配置错误处理（退出码1）"""

    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(description="D-DSTC 差分检测 BER 扫描")
    parser.add_argument("--config", help="key=value 配置文件，命令行参数优先")
    parser.add_argument("--preset", help="预设方案：quick, bpsk_cases, qpsk_cases, oracle_check, default")
    parser.add_argument("--modulation", choices=['bpsk', 'qpsk'])
    parser.add_argument("--detector", action='append',
                        help="coherent | cdd | msdd:N | msdsd:N | ml-oracle:N:draws，可重复")
    parser.add_argument("--case", action='append', help="衰落场景 1|2|3|I|II|III，可重复")
    parser.add_argument("--fsr", type=float, help="自定义 SR 归一化多普勒")
    parser.add_argument("--frd", type=float, help="自定义 RD 归一化多普勒")
    parser.add_argument("--snr-start", type=float)
    parser.add_argument("--snr-stop", type=float)
    parser.add_argument("--snr-step", type=float)
    parser.add_argument("--min-errors", type=int)
    parser.add_argument("--max-blocks", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="结果 CSV 路径")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--shard-blocks", type=int)
    parser.add_argument("--quiet", action='store_true', help="不显示进度条与摘要")
    parser.add_argument("--log-level", default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    return parser


def _convert(field, raw):
    try:
        if field in _LIST_KEYS:
            return [v.strip() for v in str(raw).split(',') if v.strip()]
        if field in _INT_KEYS:
            return int(raw)
        if field in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {field}: {raw!r}") from None
    return str(raw).strip()


def load_config_file(path):
    """
    读取 key=value 配置文件（# 开头为注释，键可用 - 或 _）

    Returns:
    --------
    dict : ExperimentConfig 字段 → 值
    """
    if not os.path.exists(path):
        raise ResultIOError(path, "config file not found")
    try:
        with open(path, encoding='utf-8') as f:
            lines = f.readlines()
    except OSError as e:
        raise ResultIOError(path, f"cannot read config: {e}") from e

    values = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split('=', 1))
        field = _KEY_MAP.get(key.replace('-', '_').lower())
        if field is None:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[field] = _convert(field, raw)
    return values


def resolve_config(args):
    """预设 ← 配置文件 ← 命令行参数"""
    values = get_config(args.preset) if args.preset else {}
    if args.config:
        values.update(load_config_file(args.config))

    flags = {
        'modulation': args.modulation,
        'detectors': [d for spec in args.detector for d in _convert('detectors', spec)] if args.detector else None,
        'cases': [c for spec in args.case for c in _convert('cases', spec)] if args.case else None,
        'f_sr': args.fsr,
        'f_rd': args.frd,
        'snr_start': args.snr_start,
        'snr_stop': args.snr_stop,
        'snr_step': args.snr_step,
        'min_errors': args.min_errors,
        'max_blocks': args.max_blocks,
        'seed': args.seed,
        'out': args.out,
        'threads': args.threads,
        'shard_blocks': args.shard_blocks,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig.from_dict(values)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=args.log_level, format='%(asctime)s %(name)s %(levelname)s %(message)s')
        config = resolve_config(args)

        engine = SimulationEngine(config, show_progress=not args.quiet)
        engine.run_ber_sweep()
        engine.save_results()
        if not args.quiet:
            engine.print_summary()
    except ConfigError as e:
        print(f"配置错误: {e}", file=sys.stderr)
        return 1
    except ResultIOError as e:
        print(f"文件错误: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
