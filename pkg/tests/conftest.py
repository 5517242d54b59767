import math

import numpy as np
import pytest

from hcran.scenario import SystemConfig, build_scenario, channel_stream, draw_channels


@pytest.fixture
def table1_config():
    return SystemConfig()


@pytest.fixture
def tiny_config():
    """1 RRH / 1 antenna / 1 RUE / 1 MUE with inactive side constraints."""
    return SystemConfig(num_rrh=1, num_rue=1, num_mue=1, antennas_rrh=1,
                        antennas_mbs=2, fronthaul_cap=math.inf,
                        interference_cap=1e-6, tradeoff=20.0,
                        rue_dist_min=10.0, rue_dist_max=30.0, slots=10)


def channels_for(config, seed):
    topo, mbs = build_scenario(config, seed)
    return draw_channels(topo, mbs, config, channel_stream(seed)), mbs


@pytest.fixture
def draw(table1_config):
    def _draw(seed=0, config=None):
        return channels_for(config or table1_config, seed)
    return _draw
