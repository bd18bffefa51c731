#!/usr/bin/env python3
"""
命令行入口测试：参数合并顺序与退出码
"""
import os
import tempfile
import unittest

from ber_tracker import read_csv
from errors import ConfigError, ResultIOError
from run_sweep import build_parser, load_config_file, main, resolve_config

FAST = ['--quiet', '--log-level', 'WARNING', '--snr-start', '0', '--snr-stop', '0',
        '--min-errors', '50', '--max-blocks', '1000', '--shard-blocks', '500', '--threads', '2']


class TestConfigFile(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text):
        path = os.path.join(self.tmp.name, 'sweep.txt')
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path

    def test_parse(self):
        path = self.write("# sweep\nmodulation = qpsk\ndetector = cdd, msdsd:4\ncase=3\n"
                          "snr-step = 2.5  # dB\nmin_errors=60\n")
        values = load_config_file(path)
        self.assertEqual(values['modulation'], 'qpsk')
        self.assertEqual(values['detectors'], ['cdd', 'msdsd:4'])
        self.assertEqual(values['cases'], ['3'])
        self.assertEqual(values['snr_step'], 2.5)
        self.assertEqual(values['min_errors'], 60)

    def test_flags_override_file(self):
        path = self.write("modulation=qpsk\ncase=II\nseed=5\n")
        args = build_parser().parse_args(['--config', path, '--modulation', 'bpsk', '--case', '3'])
        cfg = resolve_config(args)
        self.assertEqual(cfg.modulation, 'bpsk')
        self.assertEqual(cfg.cases, ['3'])
        self.assertEqual(cfg.seed, 5)

    def test_preset_layer(self):
        args = build_parser().parse_args(['--preset', 'oracle_check', '--snr-start', '10', '--snr-stop', '10'])
        cfg = resolve_config(args)
        self.assertEqual(cfg.detectors, ['msdd:3', 'msdsd:3', 'ml-oracle:3:2000'])
        self.assertEqual(cfg.snr_grid(), [10.0])

    def test_bad_files(self):
        with self.assertRaises(ConfigError):
            load_config_file(self.write("modulation qpsk\n"))
        with self.assertRaises(ConfigError):
            load_config_file(self.write("colour=blue\n"))
        with self.assertRaises(ConfigError):
            load_config_file(self.write("threads=many\n"))
        with self.assertRaises(ResultIOError):
            load_config_file(os.path.join(self.tmp.name, 'missing.txt'))


class TestExitCodes(unittest.TestCase):
    def test_success_writes_csv(self):
        print("\nTesting CLI end to end...")
        with tempfile.TemporaryDirectory() as d:
            out = os.path.join(d, 'ber.csv')
            code = main(FAST + ['--detector', 'cdd', '--case', '3', '--out', out])
            self.assertEqual(code, 0)
            points = read_csv(out)
        self.assertEqual(len(points), 1)
        self.assertEqual(points[0].case, 'III')
        self.assertEqual(points[0].detector, 'cdd')

    def test_config_errors(self):
        self.assertEqual(main(FAST + ['--modulation', '8psk']), 1)
        self.assertEqual(main(FAST + ['--detector', 'viterbi']), 1)
        self.assertEqual(main(FAST + ['--case', '7']), 1)
        self.assertEqual(main(FAST + ['--fsr', '0.01']), 1)
        self.assertEqual(main(['--quiet', '--min-errors', '10']), 1)
        self.assertEqual(main(['--threads', 'two']), 1)

    def test_io_errors(self):
        with tempfile.TemporaryDirectory() as d:
            self.assertEqual(main(FAST + ['--config', os.path.join(d, 'none.txt')]), 2)
            blocker = os.path.join(d, 'file')
            with open(blocker, 'w') as f:
                f.write('x')
            out = os.path.join(blocker, 'ber.csv')
            self.assertEqual(main(FAST + ['--out', out]), 2)


if __name__ == '__main__':
    unittest.main()
