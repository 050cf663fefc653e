# Random streams có seed + các phân phối cho traffic model
import hashlib
import math

import numpy as np

from utils.errors import ValidationError


def _label_key(label):
    """Hash ổn định (không phụ thuộc PYTHONHASHSEED) của label"""
    return int.from_bytes(hashlib.sha256(label.encode('utf-8')).digest()[:8], 'big')


class RngStream:
    """Một stream độc lập, xác định bởi (seed, label)"""

    def __init__(self, seed, label):
        if seed < 0 or seed >= 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer", field='seed')
        self.seed = int(seed)
        self.label = label
        sequence = np.random.SeedSequence([self.seed, _label_key(label)])
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self):
        return f'<RngStream {self.label} seed={self.seed}>'

    def uniform(self, size=None):
        return self.generator.random(size)


class StreamFactory:
    """Tạo stream theo label từ một master seed (mỗi process ngẫu nhiên một stream)"""

    def __init__(self, seed):
        self.seed = seed
        self._streams = {}

    def stream(self, label) -> RngStream:
        if label not in self._streams:
            self._streams[label] = RngStream(self.seed, label)
        return self._streams[label]


def sample_exponential(stream: RngStream, mean, size=None):
    if not mean > 0:
        raise ValidationError(f"mean must be positive, got {mean}", field='mean')
    draw = stream.generator.exponential(mean, size)
    if size is None:
        return float(draw)
    return draw


def pareto_scale(shape, mean):
    """x_m sao cho Pareto(shape, x_m) có kỳ vọng `mean`"""
    if not shape > 1:
        raise ValidationError(f"shape must be > 1 for a finite mean, got {shape}", field='pareto_shape')
    if not mean > 0:
        raise ValidationError(f"mean must be positive, got {mean}", field='mean')
    return mean * (shape - 1) / shape


def sample_pareto_burst(stream: RngStream, shape, mean, size=None):
    """Số packet trong một burst: ceil của Pareto(shape, x_m), luôn >= 1"""
    scale = pareto_scale(shape, mean)
    # numpy pareto() là Lomax; +1 rồi nhân scale ra Pareto cổ điển
    draw = (stream.generator.pareto(shape, size) + 1.0) * scale
    if size is None:
        return max(1, math.ceil(draw))
    return np.maximum(1, np.ceil(draw)).astype(np.int64)
