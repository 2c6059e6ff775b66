import io
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from tactile_sleeve.mapping import (Aggregation, CellDepths, DepthFrame,
                                    FrameTooSmallError, MappingConfig, Mode,
                                    MotorGrid, cell_bounds, downsample,
                                    intensity_for_depth, map_intensity,
                                    process_frame)
from tactile_sleeve.pgm import PgmError, read_pgm, write_pgm


def oracle_downsample(frame, config):
    """Independent per-pixel loop: assign each pixel to its cell by
    scanning the cell ranges, then aggregate with plain Python."""
    buckets = [[] for _ in range(25)]
    for i in range(frame.height):
        r = next(rr for rr in range(5)
                 if (rr * frame.height) // 5 <= i < ((rr + 1) * frame.height) // 5)
        for j in range(frame.width):
            c = next(cc for cc in range(5)
                     if (cc * frame.width) // 5 <= j < ((cc + 1) * frame.width) // 5)
            v = int(frame.depths[i, j])
            if v != 0:
                buckets[r * 5 + c].append(v)
    cells = []
    for vals in buckets:
        if not vals:
            cells.append(None)
        elif config.aggregation.kind == "min_valid":
            cells.append(min(vals))
        elif config.aggregation.kind == "mean_valid":
            cells.append(Fraction(sum(vals), len(vals)))
        else:
            vals = sorted(vals)
            cells.append(vals[math.floor(config.aggregation.p * (len(vals) - 1))])
    return CellDepths(tuple(cells))


def oracle_intensity(depth, config):
    """High-precision scalar evaluation of the mapping formula."""
    if depth is None:
        return config.max_duty if config.nodata_max else 0
    d = Fraction(depth)
    if config.mode is Mode.OUTDOOR and d < config.near_clip_mm:
        return 0
    if d <= config.near_clip_mm:
        return config.max_duty
    if d >= config.far_clip_mm:
        return 0
    raw = Fraction(config.max_duty) * (config.far_clip_mm - d) \
        / (config.far_clip_mm - config.near_clip_mm)
    step = math.floor(raw * config.levels / (config.max_duty + 1))
    return math.floor(Fraction(step * config.max_duty, config.levels - 1)
                      + Fraction(1, 2))


def random_config(rng):
    near = rng.randint(100, 2500)
    far = near + rng.randint(100, 6000)
    agg = rng.choice([Aggregation.min_valid(), Aggregation.mean_valid(),
                      Aggregation.percentile(rng.choice([0.05, 0.1, 0.5, 0.9]))])
    return MappingConfig(mode=rng.choice([Mode.INDOOR, Mode.OUTDOOR]),
                         near_clip_mm=near, far_clip_mm=far,
                         levels=rng.randint(2, 16), aggregation=agg,
                         nodata_max=rng.random() < 0.2)


def random_frame(rng, max_side=100):
    w = rng.randint(5, max_side)
    h = rng.randint(5, max_side)
    depths = [rng.choice([0, rng.randint(1, 8000)]) for _ in range(w * h)]
    return DepthFrame.from_flat(w, h, depths)


class TestDownsample:
    def test_uniform_input(self, uniform_frame):
        cells = downsample(uniform_frame, MappingConfig.indoor())
        assert cells.cells == (1500,) * 25

    def test_all_invalid(self, invalid_frame):
        cells = downsample(invalid_frame, MappingConfig.indoor())
        assert cells.cells == (None,) * 25

    def test_minvalid_gradient(self):
        # pixel(r, c) = (r*10 + c + 1) * 10; each 2x2 block's min is its
        # top-left pixel
        frame = DepthFrame.from_flat(
            10, 10, [(r * 10 + c + 1) * 10 for r in range(10) for c in range(10)])
        cfg = MappingConfig.indoor(aggregation=Aggregation.min_valid())
        cells = downsample(frame, cfg)
        assert cells.cell(0, 0) == 10
        assert cells.cell(4, 4) == 890
        assert cells == oracle_downsample(frame, cfg)

    def test_too_small_frame(self):
        with pytest.raises(FrameTooSmallError):
            DepthFrame.from_flat(4, 10, [1] * 40)

    def test_partition_tiles_frame(self):
        for size in (5, 7, 10, 13, 100):
            edges = [cell_bounds(size, k) for k in range(5)]
            assert edges[0][0] == 0 and edges[-1][1] == size
            for (a, b), (c, d) in zip(edges, edges[1:]):
                assert b == c and a < b

    def test_oracle_equivalence_random(self):
        rng = random.Random(42)
        for _ in range(50):
            frame = random_frame(rng, max_side=40)
            cfg = random_config(rng)
            assert downsample(frame, cfg) == oracle_downsample(frame, cfg)

    def test_min_and_mean_bounds(self):
        rng = random.Random(7)
        for _ in range(30):
            frame = random_frame(rng, max_side=30)
            for agg in (Aggregation.min_valid(), Aggregation.mean_valid()):
                cells = downsample(frame, MappingConfig.indoor(aggregation=agg))
                for r in range(5):
                    r0, r1 = cell_bounds(frame.height, r)
                    for c in range(5):
                        c0, c1 = cell_bounds(frame.width, c)
                        block = frame.depths[r0:r1, c0:c1]
                        valid = block[block != 0]
                        got = cells.cell(r, c)
                        if valid.size == 0:
                            assert got is None
                        else:
                            assert int(valid.min()) <= got <= int(valid.max())


class TestMapIntensity:
    def test_beyond_far_clip_is_silent(self):
        cfg = MappingConfig.indoor()
        cells = CellDepths((3000,) * 12 + (5000,) * 13)
        assert map_intensity(cells, cfg).intensities == (0,) * 25

    def test_near_clip_saturates_indoor(self):
        assert intensity_for_depth(300, MappingConfig.indoor()) == 4095
        assert intensity_for_depth(299, MappingConfig.indoor()) == 4095

    def test_midpoint_quantization(self):
        # raw = 4095 * 1350 / 2700 = 2047.5 -> step 3 -> 3 * 4095 / 7
        cfg = MappingConfig.indoor(levels=8)
        assert intensity_for_depth(1650, cfg) == 1755
        assert intensity_for_depth(1650, cfg) == oracle_intensity(1650, cfg)

    def test_outdoor_near_field_is_silent(self):
        cfg = MappingConfig.outdoor()
        assert intensity_for_depth(1999, cfg) == 0
        assert intensity_for_depth(2000, cfg) == 4095
        assert intensity_for_depth(6000, cfg) == 0

    def test_nodata_default_and_flag(self):
        assert intensity_for_depth(None, MappingConfig.indoor()) == 0
        assert intensity_for_depth(None, MappingConfig.indoor(nodata_max=True)) == 4095

    def test_matches_scalar_oracle(self):
        rng = random.Random(3)
        for _ in range(500):
            cfg = random_config(rng)
            d = rng.choice([None, rng.randint(0, 10000)])
            if d == 0:
                d = None
            assert intensity_for_depth(d, cfg) == oracle_intensity(d, cfg)

    def test_monotonic_in_depth(self):
        rng = random.Random(11)
        for _ in range(200):
            cfg = random_config(rng)
            d1 = rng.randint(cfg.near_clip_mm + 1, cfg.far_clip_mm - 1)
            d2 = rng.randint(d1, cfg.far_clip_mm - 1)
            assert intensity_for_depth(d1, cfg) >= intensity_for_depth(d2, cfg)

    def test_level_count_bound(self):
        rng = random.Random(13)
        for _ in range(50):
            cfg = random_config(rng)
            values = {intensity_for_depth(d, cfg)
                      for d in range(1, cfg.far_clip_mm + 200, 7)}
            assert len(values) <= cfg.levels + 1
            assert all(0 <= v <= cfg.max_duty for v in values)


class TestProcessFrame:
    def test_uniform_preserved(self, uniform_frame):
        grid = process_frame(uniform_frame, MappingConfig.indoor())
        assert len(set(grid.intensities)) == 1
        assert grid.intensities[0] == intensity_for_depth(1500, MappingConfig.indoor())

    def test_all_invalid_is_zero(self, invalid_frame):
        grid = process_frame(invalid_frame, MappingConfig.indoor())
        assert grid == MotorGrid.zero()

    def test_hallway_edges_stronger_than_center(self, hallway_frame):
        grid = process_frame(hallway_frame, MappingConfig.indoor())
        for r in range(5):
            row = [grid.intensity(r, c) for c in range(5)]
            assert row[0] >= row[2] and row[4] >= row[2]
            assert row[0] > row[2]  # strictly stronger at the walls

    def test_deterministic(self, hallway_frame):
        cfg = MappingConfig.indoor()
        assert process_frame(hallway_frame, cfg) == process_frame(hallway_frame, cfg)


class TestConfigText:
    def test_round_trip(self):
        cfg = MappingConfig.outdoor(levels=12,
                                    aggregation=Aggregation.percentile(0.25),
                                    nodata_max=True)
        assert MappingConfig.from_text(cfg.to_text()) == cfg

    def test_defaults(self):
        indoor = MappingConfig.indoor()
        assert (indoor.near_clip_mm, indoor.far_clip_mm) == (300, 3000)
        outdoor = MappingConfig.outdoor()
        assert (outdoor.near_clip_mm, outdoor.far_clip_mm) == (2000, 6000)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            MappingConfig.from_text("mode indoor")
        with pytest.raises(ValueError):
            MappingConfig.from_text("near_clip_mm = 5000\nfar_clip_mm = 100")
        with pytest.raises(ValueError):
            MappingConfig(levels=1)


class TestPgm:
    def test_round_trip(self, hallway_frame):
        buf = io.BytesIO()
        write_pgm(hallway_frame, buf)
        buf.seek(0)
        back = read_pgm(buf)
        assert back.width == hallway_frame.width
        assert np.array_equal(back.depths, hallway_frame.depths)

    def test_big_endian_samples(self):
        frame = DepthFrame.from_flat(5, 5, [0x0102] * 25)
        buf = io.BytesIO()
        write_pgm(frame, buf)
        raster = buf.getvalue().split(b"65535\n", 1)[1]
        assert raster[:2] == b"\x01\x02"

    def test_rejects_garbage(self):
        with pytest.raises(PgmError):
            read_pgm(io.BytesIO(b"P2\n5 5\n255\n"))
        with pytest.raises(PgmError):
            read_pgm(io.BytesIO(b"P5\n5 5\n255\n" + b"\x00" * 25))
        with pytest.raises(PgmError):
            read_pgm(io.BytesIO(b"P5\n5 5\n65535\n\x00\x00"))
