import os
import json
import tempfile
import unittest
from pathlib import Path
from unittest import mock
from context import geodl
from geodl.utils.config import (
    ConfigError,
    ExperimentConfig,
    parse_config,
    default_config_text
)


@mock.patch.dict(os.environ, {}, clear=False)
class TestParseConfig(unittest.TestCase):
    def setUp(self):
        os.environ.pop("GEODL_SEED", None)

    def test_defaults(self):
        cfg = parse_config(None)
        self.assertEqual(cfg, ExperimentConfig())
        self.assertEqual(cfg.beta, 6.0)
        self.assertEqual(cfg.subspace_n, 6)
        self.assertEqual(cfg.modes, ["none", "geodl"])
        self.assertEqual(len(cfg.run_pairs()), 20)

    def test_values_and_pairs(self):
        cfg = parse_config("beta = 3.5\nmode = none, lwf, geodl  # three modes\nseeds = 4,5,6\n")
        self.assertEqual(cfg.beta, 3.5)
        self.assertEqual(len(cfg.run_pairs()), 9)
        self.assertEqual(cfg.run_pairs()[0], ("none", 4))
        self.assertEqual(cfg.run_pairs()[-1], ("geodl", 6))

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("\nfoo = 1\n")
        self.assertEqual(ctx.exception.issues[0][0], 2)
        self.assertIn("foo", str(ctx.exception))

    def test_reports_every_issue(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("foo = 1\nbeta = 2\nlr = abc\nnot a pair\n")
        self.assertEqual([line for line, _ in ctx.exception.issues], [1, 3, 4])

    def test_range_checks(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("beta = -1\ntau = 0\nmode = geodl,bogus\n")
        self.assertEqual([line for line, _ in ctx.exception.issues], [1, 2, 3])

    def test_cross_field_line(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("seeds = 0\nclasses_total = 21\n")
        self.assertEqual(ctx.exception.issues[0][0], 2)
        with self.assertRaises(ConfigError):
            parse_config("subspace_n = 8\n")

    def test_duplicated_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("beta = 1\nbeta = 2\n")
        self.assertEqual(ctx.exception.issues[0][0], 2)

    def test_seed_from_environment(self):
        os.environ["GEODL_SEED"] = "7"
        self.assertEqual(parse_config(None).master_seed, 7)
        os.environ["GEODL_SEED"] = "seven"
        with self.assertRaises(ConfigError):
            parse_config(None)

    def test_default_text_roundtrip(self):
        self.assertEqual(parse_config(default_config_text()), ExperimentConfig())

    def test_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            jpath = Path(tmp, "cfg.json")
            jpath.write_text(json.dumps({"beta": 2.0, "seeds": [0, 1], "center": False}))
            cfg = parse_config(str(jpath))
            self.assertEqual((cfg.beta, cfg.seeds, cfg.center), (2.0, [0, 1], False))
            tpath = Path(tmp, "cfg.txt")
            tpath.write_text("memory_per_class = 5\nrecord_timing = yes\n")
            cfg = parse_config(tpath)
            self.assertEqual((cfg.memory_per_class, cfg.record_timing), (5, True))
            with self.assertRaises(ConfigError):
                parse_config(Path(tmp, "missing.txt"))
            with self.assertRaises(ConfigError) as ctx:
                parse_config(str(Path(tmp, "missing.cfg")))
            self.assertIn("not found", str(ctx.exception))


class TestExperimentConfig(unittest.TestCase):
    def test_config_hash(self):
        cfg = ExperimentConfig()
        self.assertEqual(cfg.config_hash(), ExperimentConfig(seeds=[3], workers=4).config_hash())
        self.assertNotEqual(cfg.config_hash(), cfg.replace(beta=1.0).config_hash())

    def test_replace_validates(self):
        self.assertEqual(ExperimentConfig().replace(subspace_n="3").subspace_n, 3)
        with self.assertRaises(ConfigError):
            ExperimentConfig().replace(memory_per_class=0)


if __name__ == '__main__':
    unittest.main()
