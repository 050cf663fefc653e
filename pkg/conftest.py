# Fixtures dùng chung cho test suite
import os

import pytest

os.environ.setdefault('APP_ENV', 'testing')

from config.scenario import ScenarioConfig  # noqa: E402
from services.radio_service import ChannelKind  # noqa: E402


def pytest_collection_modifyitems(config, items):
    if os.environ.get('RUN_SLOW') == '1':
        return
    skip_slow = pytest.mark.skip(reason="slow: set RUN_SLOW=1 to run")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def default_scenario():
    return ScenarioConfig().validate()


@pytest.fixture
def tiny_scenario():
    """Vài trăm giây mô phỏng, burst bị chặn để test chạy nhanh"""
    return ScenarioConfig(duration=300.0, warmup_fraction=0.05, burst_cap=400, seed=7).validate()


@pytest.fixture
def validation_scenario():
    """Một connection, một burst 10 x 1000 byte, window không giới hạn, backhaul delay 0"""
    def build(channel: ChannelKind, cbr=True):
        return ScenarioConfig(
            n_tcp=1,
            n_dch=1,
            packet_size=1000,
            w_max=None,
            initial_cwnd=1000,
            backhaul_delay=0.0,
            traffic=False,
            cbr_enabled=cbr,
            pin_channel=channel,
            duration=30.0,
            warmup_fraction=0.0,
        ).validate()
    return build


@pytest.fixture
def app():
    from app import create_app
    from config.env import TestingConfig

    application = create_app(TestingConfig)
    yield application


@pytest.fixture
def client(app):
    return app.test_client()
