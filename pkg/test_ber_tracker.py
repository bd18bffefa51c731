#!/usr/bin/env python3
"""
误码统计与结果 CSV 测试
"""
import os
import tempfile
import unittest

import numpy as np

from ber_tracker import BerPoint, ErrorCounter, confidence_halfwidth, emit_csv, make_ber_point, read_csv
from config import CSV_COLUMNS, Z_95
from errors import DomainError, ResultIOError


def sample_point(**overrides):
    values = dict(snr_db=12.5, detector='msdsd:10', case='III', bits=123456, errors=789,
                  ber=789 / 123456, ci95=confidence_halfwidth(789, 123456), blocks=61728,
                  capped=False, seed=20120501, wall_time=1.5)
    values.update(overrides)
    return BerPoint(**values)


class TestErrorCounter(unittest.TestCase):
    def test_accumulate(self):
        counter = ErrorCounter()
        counter.add(1000, 10, 500)
        counter.add(1000, 30, 500)
        self.assertEqual(counter.bits, 2000)
        self.assertEqual(counter.errors, 40)
        self.assertEqual(counter.blocks, 1000)
        self.assertAlmostEqual(counter.ber, 0.02)
        self.assertTrue(counter.reached(40))
        self.assertFalse(counter.reached(41))

    def test_count_bits(self):
        counter = ErrorCounter()
        sent = np.zeros((4, 2), dtype=np.uint8)
        decided = sent.copy()
        decided[1, 0] = 1
        decided[3] = 1
        self.assertEqual(counter.count(sent, decided), 3)
        self.assertEqual(counter.bits, 8)
        self.assertEqual(counter.blocks, 4)

    def test_invalid_counts(self):
        counter = ErrorCounter()
        with self.assertRaises(DomainError):
            counter.add(10, 11, 5)
        with self.assertRaises(DomainError):
            counter.count(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_empty_ber(self):
        self.assertEqual(ErrorCounter().ber, 0.0)
        self.assertEqual(confidence_halfwidth(0, 0), 0.0)

    def test_make_point(self):
        counter = ErrorCounter()
        counter.add(10_000, 100, 5000)
        point = make_ber_point(counter, 20.0, 'cdd', 'I', seed=7, capped=True)
        self.assertEqual(point.ber, 0.01)
        self.assertAlmostEqual(point.ci95, Z_95 * np.sqrt(0.01 * 0.99 / 10_000))
        self.assertTrue(point.capped)
        self.assertEqual(list(point.as_row()), CSV_COLUMNS)


class TestConfidenceCoverage(unittest.TestCase):
    def test_known_error_probability(self):
        """已知误码率 p=0.01 的信道：估计值落入报告区间的比例不低于 90%"""
        print("\nTesting 95% interval coverage...")
        p = 0.01
        rng = np.random.default_rng(99)
        covered = 0
        runs = 200
        for _ in range(runs):
            counter = ErrorCounter()
            sent = rng.integers(0, 2, size=(10_000, 2), dtype=np.uint8)
            flips = (rng.random(sent.shape) < p).astype(np.uint8)
            counter.count(sent, sent ^ flips)
            point = make_ber_point(counter, 0.0, 'synthetic', 'none', seed=0)
            covered += int(abs(point.ber - p) <= point.ci95)
        print(f"  coverage {covered}/{runs}")
        self.assertGreaterEqual(covered, 0.9 * runs)


class TestCsv(unittest.TestCase):
    def test_empty_sequence_header_only(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'empty.csv')
            emit_csv([], path)
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines, [','.join(CSV_COLUMNS)])

    def test_one_point_two_lines(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'nested', 'one.csv')
            emit_csv([sample_point()], path)
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(len(lines), 2)
        self.assertEqual(lines[0].split(','), CSV_COLUMNS)

    def test_round_trip_exact(self):
        points = [sample_point(), sample_point(snr_db=0.1, ber=1 / 3, ci95=np.pi * 1e-5, capped=True, case='I'),
                  sample_point(detector='ml-oracle:3:2000', errors=0, ber=0.0, ci95=0.0)]
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'points.csv')
            emit_csv(points, path)
            back = read_csv(path)
        self.assertEqual(len(back), len(points))
        for a, b in zip(points, back):
            self.assertEqual(a.as_row(), b.as_row())

    def test_io_errors_carry_path(self):
        with tempfile.TemporaryDirectory() as d:
            blocker = os.path.join(d, 'file')
            with open(blocker, 'w') as f:
                f.write('x')
            path = os.path.join(blocker, 'out.csv')
            with self.assertRaises(ResultIOError) as ctx:
                emit_csv([sample_point()], path)
            self.assertIn(path, str(ctx.exception))
        with self.assertRaises(ResultIOError):
            read_csv('/nonexistent/results.csv')


if __name__ == '__main__':
    unittest.main()
