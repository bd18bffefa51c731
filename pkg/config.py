"""
配置文件 - D-DSTC 差分检测链路仿真
"""

# ==================== 数值容差 ====================

HERMITIAN_RTOL = 1e-12  # Hermitian 标记矩阵 A = A^H 的相对容差
UNITARY_TOL = 1e-12  # 码字酉性 V^H V = I 的容差
CODEWORD_MIN_DISTANCE = 1e-9  # 码字两两 Frobenius 距离下限
CHOLESKY_RTOL = 1e-10  # U^H U = C^{-1} 的相对 Frobenius 容差
TIE_RTOL = 1e-9  # 度量并列判定的相对容差（并列时取字典序最小的下标向量）

# ==================== 网络参数 ====================

NUM_RELAYS = 2  # 中继数 R（仅支持 Alamouti，R=2）
NOISE_LEVEL = 1.0  # N0 固定为1，横轴 P/N0 通过扫描总功率 P 实现
SUPPORTED_PSK_ORDERS = (2, 4, 8, 16)  # 码本支持的 PSK 阶数
MODULATIONS = {'bpsk': 2, 'qpsk': 4}  # 命令行可选调制

# ==================== 衰落参数 ====================

SOS_SINUSOIDS = 32  # 每个过程的正弦波数量（不少于16）
MAX_NORMALIZED_DOPPLER = 0.5  # 归一化多普勒上限

# 三种衰落场景 (f_sr, f_rd)
CASE_DOPPLERS = {
    'I': (0.001, 0.001),  # 慢衰落，近似静态
    'II': (0.006, 0.004),  # 源节点移动略快于目的节点
    'III': (0.009, 0.01),  # 快衰落，目的节点移动略快
}

# ==================== 检测器参数 ====================

DETECTORS = ('coherent', 'cdd', 'msdd', 'msdsd', 'ml-oracle')
DEFAULT_WINDOW = 10  # MSDSD 默认窗口长度 N
EXHAUSTIVE_MAX_CANDIDATES = 10 ** 7  # 穷举 MSDD 搜索空间上限 L^(N-1)
EXHAUSTIVE_BATCH_PATHS = 1 << 15  # 穷举 MSDD 每批向量化展开的路径数上限
ML_ORACLE_MAX_CANDIDATES = 4096  # ML 预言机候选序列上限
ML_ORACLE_MIN_DRAWS = 1000  # ML 预言机蒙特卡洛抽样下限
ML_ORACLE_DRAWS = 2000  # ML 预言机默认抽样数

# ==================== 仿真参数 ====================

# 停止规则：误比特数达到下限或块数达到上限，先到为准
MIN_BIT_ERRORS = 200
MAX_BLOCKS = 2_000_000
MIN_REPORTED_ERRORS = 50  # 有效点的最小误比特数

SNR_START = 0.0  # P/N0 起点 (dB)
SNR_STOP = 40.0  # P/N0 终点 (dB)
SNR_STEP = 5.0  # P/N0 步长 (dB)

SHARD_BLOCKS = 10_000  # 每个分片仿真的数据块数
DEFAULT_THREADS = 4  # 分片并发线程数
MASTER_SEED = 20120501  # 主随机种子

# ==================== 输出参数 ====================

OUTPUT_DIR = "./ber_results"  # 结果输出目录
CSV_COLUMNS = ['snr_db', 'detector', 'case', 'bits', 'errors', 'ber',
               'ci95', 'blocks', 'capped', 'seed']
CSV_FLOAT_FORMAT = '%.17g'  # 17位有效数字，保证往返解析精确
Z_95 = 1.959963984540054  # 95% 正态分位数
