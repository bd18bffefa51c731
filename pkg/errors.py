"""
异常定义 - 仿真器各模块共用
"""
import numpy as np


class SimulationError(Exception):
    """仿真器异常基类"""


class DomainError(SimulationError, ValueError):
    """数值输入不合法（非有限值、空序列、长度不匹配等）"""


class ConfigError(SimulationError, ValueError):
    """配置错误（不支持的调制阶数、检测器描述错误、搜索空间超限等）"""


class ContractError(SimulationError, RuntimeError):
    """接口约定被破坏（例如相干检测缺少 genie 信道数据）"""


class NotPositiveDefiniteError(SimulationError, np.linalg.LinAlgError):
    """矩阵非正定，pivot 为原始顺序下失败的主元下标（从0开始）"""

    def __init__(self, pivot, value=None):
        self.pivot = pivot
        self.value = value
        msg = f"not positive definite (pivot {pivot}"
        if value is not None:
            msg += f", value {value:.3e}"
        super().__init__(msg + ")")


class ResultIOError(SimulationError, OSError):
    """结果文件读写失败，消息中带有路径"""

    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")
