"""
仿真场景配置 - 衰落场景、检测器组合常用实验方案
"""
from config import CASE_DOPPLERS, DEFAULT_WINDOW, MASTER_SEED, MAX_BLOCKS, MIN_BIT_ERRORS

# ==================== 衰落场景 ====================
CASE_ALIASES = {'1': 'I', '2': 'II', '3': 'III', 'I': 'I', 'II': 'II', 'III': 'III'}


def resolve_case(name):
    """'1'/'I' 等写法统一为 'I'/'II'/'III'，无法识别时返回 None"""
    return CASE_ALIASES.get(str(name).strip().upper())


# ==================== 方案1：快速检查 ====================
QUICK_CONFIG = {
    'modulation': 'bpsk',
    'detectors': ['cdd'],
    'cases': ['I'],
    'snr_start': 0.0,
    'snr_stop': 20.0,
    'snr_step': 10.0,
    'min_errors': 50,
    'max_blocks': 20_000,
    'seed': MASTER_SEED,
}

# ==================== 方案2：BPSK 三场景对比 ====================
BPSK_CASES_CONFIG = {
    'modulation': 'bpsk',
    'detectors': ['coherent', 'cdd', f'msdsd:{DEFAULT_WINDOW}'],
    'cases': ['I', 'II', 'III'],
    'snr_start': 0.0,
    'snr_stop': 40.0,
    'snr_step': 5.0,
    'min_errors': MIN_BIT_ERRORS,
    'max_blocks': MAX_BLOCKS,
    'seed': MASTER_SEED,
    # 相干检测只在 Case I 作为基准，MSDSD 只在 Case II/III
    'skip': [('coherent', 'II'), ('coherent', 'III'), (f'msdsd:{DEFAULT_WINDOW}', 'I')],
}

# ==================== 方案3：QPSK 三场景对比 ====================
QPSK_CASES_CONFIG = dict(BPSK_CASES_CONFIG, modulation='qpsk')

# ==================== 方案4：检测器一致性 ====================
ORACLE_CHECK_CONFIG = {
    'modulation': 'bpsk',
    'detectors': ['msdd:3', 'msdsd:3', 'ml-oracle:3:2000'],
    'cases': ['III'],
    'snr_start': 20.0,
    'snr_stop': 20.0,
    'snr_step': 5.0,
    'min_errors': 50,
    'max_blocks': 20_000,
    'seed': MASTER_SEED,
}

# 默认方案
DEFAULT_CONFIG = {
    'modulation': 'bpsk',
    'detectors': ['cdd'],
    'cases': ['I'],
    'snr_start': 0.0,
    'snr_stop': 40.0,
    'snr_step': 5.0,
    'min_errors': MIN_BIT_ERRORS,
    'max_blocks': MAX_BLOCKS,
    'seed': MASTER_SEED,
}


def get_config(config_name='default'):
    """
    获取指定的实验方案

    Parameters:
    -----------
    config_name : str
        方案名称: 'quick', 'bpsk_cases', 'qpsk_cases', 'oracle_check', 'default'

    Returns:
    --------
    dict : 配置字典（副本）
    """
    configs = {
        'quick': QUICK_CONFIG,
        'bpsk_cases': BPSK_CASES_CONFIG,
        'qpsk_cases': QPSK_CASES_CONFIG,
        'oracle_check': ORACLE_CHECK_CONFIG,
        'default': DEFAULT_CONFIG,
    }
    return dict(configs.get(config_name, DEFAULT_CONFIG))


def case_dopplers(case):
    """场景 → (f_sr, f_rd)"""
    return CASE_DOPPLERS[resolve_case(case)]
