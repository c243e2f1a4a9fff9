"""Shared fixtures.  The 60 s event collections are expensive and cached
per session; everything downstream (acceptance criteria included) reuses
them.
"""
import time

import pytest

from nested_mzi import OpticsConfig, RunConfig, collect_events, default_bank, fit_p


@pytest.fixture(scope="session")
def optics():
    return OpticsConfig()


@pytest.fixture(scope="session")
def bank():
    """Canonical bank: default frequencies, amplitude 0.01, zero phases."""
    return default_bank()


@pytest.fixture(scope="session")
def fig1a_bank():
    """Bank as resolved by the fig1a scenario (mirror F in quadrature)."""
    return RunConfig(scenario="fig1a").resolve_bank()


@pytest.fixture(scope="session")
def fig1b_bank():
    """fig1a bank with mirror A retuned to 278 Hz."""
    return RunConfig(scenario="fig1b").resolve_bank()


@pytest.fixture(scope="session")
def fitted(optics, fig1a_bank):
    return fit_p(optics, fig1a_bank)


@pytest.fixture(scope="session")
def fig1a_events_60s(optics, fig1a_bank, fitted):
    """(events, wall_seconds) for the full 60 s fig1a collection."""
    t0 = time.perf_counter()
    events = collect_events(fig1a_bank, optics, fitted.model, (0.0, 60.0), mode="measured")
    return events, time.perf_counter() - t0


@pytest.fixture(scope="session")
def fig1b_events_60s(optics, fig1b_bank, fitted):
    events = collect_events(fig1b_bank, optics, fitted.model, (0.0, 60.0), mode="measured")
    return events, 0.0
