#!/usr/bin/env python3
"""
码本测试：Alamouti 码字、Gray 映射、差分编码
"""
import itertools
import unittest

import numpy as np

from codebook import (
    Codebook,
    alamouti_matrix,
    bits_to_codeword,
    bits_to_indices,
    build_alamouti_codebook,
    codeword_to_bits,
    differential_encode,
    gray_decode,
    gray_encode,
    indices_to_bits,
)
from errors import ConfigError, DomainError


class TestAlamoutiCodebook(unittest.TestCase):
    def test_sizes(self):
        print("\nTesting Alamouti codebook construction...")
        for m in (2, 4, 8, 16):
            cb = build_alamouti_codebook(m)
            self.assertEqual(cb.size, m * m)
            self.assertEqual(cb.bits_per_codeword, 2 * int(np.log2(m)))
            self.assertTrue(cb.is_alamouti)

    def test_unitary_and_distinct(self):
        cb = build_alamouti_codebook(4)
        eye = np.eye(2)
        for v in cb.matrices:
            self.assertLess(np.linalg.norm(v.conj().T @ v - eye), 1e-12)
            self.assertLess(np.linalg.norm(v @ v.conj().T - eye), 1e-12)
        dist = np.linalg.norm(cb.matrices[:, None] - cb.matrices[None, :], axis=(2, 3))
        self.assertGreater(np.min(dist + np.eye(cb.size) * 10), 1e-9)

    def test_anchor_codeword(self):
        v = alamouti_matrix(1, 1)
        np.testing.assert_allclose(v, np.array([[1, -1], [1, 1]]) / np.sqrt(2))
        np.testing.assert_allclose(v.conj().T @ v, np.eye(2), atol=1e-15)

    def test_unsupported_order(self):
        for m in (1, 3, 32):
            with self.assertRaises(ConfigError):
                build_alamouti_codebook(m)

    def test_symbol_indices(self):
        cb = build_alamouti_codebook(4)
        i1, i2 = cb.symbol_indices(np.arange(cb.size))
        np.testing.assert_allclose(cb.symbols[:, 0], np.exp(2j * np.pi * i1 / 4))
        np.testing.assert_allclose(cb.symbols[:, 1], np.exp(2j * np.pi * i2 / 4))


class TestBitMapping(unittest.TestCase):
    def test_zero_bits_anchor(self):
        cb = build_alamouti_codebook(2)
        word = bits_to_codeword(cb, "00")
        np.testing.assert_allclose(cb.symbols[word.index], [1, 1])
        np.testing.assert_allclose(word.matrix, alamouti_matrix(1, 1))

    def test_bijection(self):
        for m in (2, 4):
            cb = build_alamouti_codebook(m)
            width = cb.bits_per_codeword
            seen = set()
            for bits in itertools.product('01', repeat=width):
                s = ''.join(bits)
                word = bits_to_codeword(cb, s)
                self.assertEqual(codeword_to_bits(cb, word.index), s)
                seen.add(word.index)
            self.assertEqual(len(seen), cb.size)

    def test_gray_neighbours(self):
        """相邻 PSK 点的标号只差一位"""
        cb = build_alamouti_codebook(4)
        m = cb.order
        for i in range(m):
            a = codeword_to_bits(cb, i * m)[:2]
            b = codeword_to_bits(cb, ((i + 1) % m) * m)[:2]
            self.assertEqual(sum(x != y for x, y in zip(a, b)), 1)
            a = codeword_to_bits(cb, i)[2:]
            b = codeword_to_bits(cb, (i + 1) % m)[2:]
            self.assertEqual(sum(x != y for x, y in zip(a, b)), 1)

    def test_gray_inverse(self):
        labels = np.arange(64)
        np.testing.assert_array_equal(gray_decode(gray_encode(labels)), labels)

    def test_vectorized_round_trip(self):
        cb = build_alamouti_codebook(4)
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, size=(500, cb.bits_per_codeword), dtype=np.uint8)
        np.testing.assert_array_equal(indices_to_bits(cb, bits_to_indices(cb, bits)), bits)

    def test_wrong_width(self):
        cb = build_alamouti_codebook(4)
        with self.assertRaises(DomainError):
            bits_to_codeword(cb, "010")
        with self.assertRaises(DomainError):
            bits_to_codeword(cb, "01a1")
        with self.assertRaises(DomainError):
            bits_to_indices(cb, np.zeros((3, 3), dtype=np.uint8))


class TestDifferentialEncode(unittest.TestCase):
    def test_identity_stream(self):
        cb = Codebook(relays=2, order=1, matrices=np.eye(2, dtype=complex)[None], symbols=np.ones((1, 2)))
        frame = differential_encode(cb, np.zeros(5, dtype=int))
        np.testing.assert_array_equal(frame.s, np.tile([1, 0], (6, 1)))

    def test_first_block(self):
        cb = build_alamouti_codebook(2)
        frame = differential_encode(cb, [0])
        np.testing.assert_allclose(frame.s[0], [1, 0])
        np.testing.assert_allclose(frame.s[1], np.array([1, 1]) / np.sqrt(2))

    def test_unit_norm_and_recursion(self):
        print("\nTesting differential encoding over 10^4 blocks...")
        cb = build_alamouti_codebook(4)
        rng = np.random.default_rng(1)
        idx = rng.integers(0, cb.size, 10_000)
        frame = differential_encode(cb, idx)
        self.assertEqual(frame.blocks, 10_000)
        np.testing.assert_allclose(np.linalg.norm(frame.s, axis=1), 1.0, atol=1e-12)
        for k in (1, 17, 5000, 10_000):
            np.testing.assert_allclose(frame.s[k], cb.matrices[idx[k - 1]] @ frame.s[k - 1], atol=1e-12)
            np.testing.assert_allclose(frame.matrices[k], cb.matrices[idx[k - 1]] @ frame.matrices[k - 1],
                                       atol=1e-12)
        np.testing.assert_array_equal(frame.s, frame.matrices[:, :, 0])

    def test_invalid_indices(self):
        cb = build_alamouti_codebook(2)
        with self.assertRaises(DomainError):
            differential_encode(cb, [0, 4])
        with self.assertRaises(DomainError):
            differential_encode(cb, [-1])


if __name__ == '__main__':
    unittest.main()
