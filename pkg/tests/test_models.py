"""Unit tests for the value/energy/delay evaluators and the validator."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdcache import models
from sdcache.types import (
    DomainError,
    RequestHistory,
    Rsu,
    SensingDatum,
    SlotObservation,
    ValueWeights,
)

from conftest import make_tiny_instance, random_decision


def _rsu(**kw) -> Rsu:
    base = dict(id=0, location=(0.0, 0.0), storage_bits=10**6,
                bandwidth_hz=20e6, tx_power_w=1.0, service_rate=20.0,
                coverage_radius_m=200.0)
    base.update(kw)
    return Rsu(**base)


def _sd(**kw) -> SensingDatum:
    base = dict(id=0, size_bits=10**6, update_slot=0, expiry_slot=10,
                origin=(0.0, 0.0), validity_radius_m=100.0)
    base.update(kw)
    return SensingDatum(**base)


class TestFreshness:
    def test_full_at_update(self):
        assert models.freshness(_sd(update_slot=2, expiry_slot=12), 2) == 1.0

    def test_linear_decay(self):
        sd = _sd(update_slot=0, expiry_slot=10)
        assert models.freshness(sd, 4) == pytest.approx(0.6)

    def test_clamped_after_expiry(self):
        assert models.freshness(_sd(expiry_slot=10), 15) == 0.0

    def test_before_generation_raises(self):
        with pytest.raises(DomainError, match="not yet generated"):
            models.freshness(_sd(update_slot=5, expiry_slot=10), 3)


class TestPopularity:
    def test_zero_when_never_requested(self):
        history = RequestHistory(1, 1)
        assert models.popularity(history, 0, 0, ValueWeights()) == 0.0

    def test_single_request_uses_gap_for_both_terms(self):
        history = RequestHistory(1, 1)
        history.advance(0, np.array([[3]]))
        history.advance(1, np.array([[0]]))
        # One request of size 3 at slot 0, observed after slot 1: r = z = 2.
        expected = 0.5 * (math.exp(-2 / 3) + math.exp(-2 / 3))
        assert models.popularity(history, 0, 0, ValueWeights()) == pytest.approx(expected)

    def test_interval_and_gap_tracked_separately(self):
        history = RequestHistory(1, 1)
        history.advance(0, np.array([[1]]))
        history.advance(1, np.array([[0]]))
        history.advance(2, np.array([[1]]))
        history.advance(3, np.array([[0]]))
        # Requests at slots 0 and 2: interval 2, gap (after slot 3) is 2.
        expected = 0.5 * (math.exp(-2 / 2) + math.exp(-2 / 2))
        assert models.popularity(history, 0, 0, ValueWeights()) == pytest.approx(expected)

    def test_matrix_matches_scalar(self):
        rng = np.random.default_rng(3)
        history = RequestHistory(2, 3)
        for t in range(6):
            history.advance(t, rng.integers(0, 2, (2, 3)))
        w = ValueWeights(0.9, 0.8)
        mat = models.popularity_matrix(history, w)
        for j in range(2):
            for k in range(3):
                assert mat[j, k] == pytest.approx(models.popularity(history, j, k, w))

    def test_weights_scale_terms(self):
        history = RequestHistory(1, 1)
        history.advance(0, np.array([[2]]))
        full = models.popularity(history, 0, 0, ValueWeights(1.0, 1.0))
        half = models.popularity(history, 0, 0, ValueWeights(0.5, 0.5))
        assert half == pytest.approx(full / 2)


class TestExpectedRate:
    def _obs(self, gains) -> SlotObservation:
        return SlotObservation(
            slot=0,
            demand=np.zeros((1, 1), dtype=np.int64),
            scope=np.zeros((1, 1), dtype=np.int64),
            channel_gain_samples={(0, 0): np.asarray(gains)},
        )

    def test_mean_of_shannon_rates(self):
        rsu = _rsu()
        gains = [1e-6, 2e-6, 3e-6]
        noise = 1e-10
        expected = np.mean(
            [rsu.bandwidth_hz * math.log2(1 + g * rsu.tx_power_w / noise) for g in gains]
        )
        assert models.expected_rate(rsu, 0, self._obs(gains), noise) == pytest.approx(expected)

    def test_missing_pair_raises(self):
        with pytest.raises(DomainError, match="no channel observation"):
            models.expected_rate(_rsu(id=5), 0, self._obs([1e-6]), 1e-10)

    def test_bad_noise_raises(self):
        with pytest.raises(DomainError, match="invalid noise power"):
            models.expected_rate(_rsu(), 0, self._obs([1e-6]), 0.0)

    def test_degenerate_channel_raises(self):
        with pytest.raises(DomainError, match="degenerate channel"):
            models.expected_rate(_rsu(), 0, self._obs([1e-30]), 1e-3)


class TestScope:
    def test_inside_radius(self):
        sd = _sd(origin=(50.0, 0.0), validity_radius_m=100.0)
        assert models.affected_scope(sd, _rsu(), frozenset(), 0) == 1

    def test_outside_radius(self):
        sd = _sd(origin=(150.0, 0.0), validity_radius_m=100.0)
        assert models.affected_scope(sd, _rsu(), frozenset(), 0) == 0

    def test_traffic_rule_excludes(self):
        sd = _sd(origin=(10.0, 0.0))
        assert models.affected_scope(sd, _rsu(), frozenset({(0, 0)}), 0) == 0


class TestEnergy:
    def test_frozen_caching_energy(self):
        inst = make_tiny_instance(0)
        x = np.zeros((inst.n_rsus, inst.n_sds), dtype=np.int64)
        x[0, 0] = 1
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        expected = (
            inst.cache_power_w_per_bit * inst.sizes[0] * inst.slot_length_s
            + float(np.sum(inst.bs_energy_coef * inst.demand))
        )
        assert models.total_energy(x, y, inst) == pytest.approx(expected)

    def test_overallocation_raises(self):
        inst = make_tiny_instance(0)
        x = np.ones((inst.n_rsus, inst.n_sds), dtype=np.int64)
        y = np.full((inst.n_rsus, inst.n_regions, inst.n_sds), 10, dtype=np.int64)
        with pytest.raises(DomainError, match="exceeds demand"):
            models.total_energy(x, y, inst)

    def test_rsu_serving_replaces_bs_energy(self):
        inst = make_tiny_instance(4)
        pairs = np.argwhere(inst.demand > 0)
        if len(pairs) == 0:
            pytest.skip("no demand in this draw")
        j, k = pairs[0]
        i = int(np.flatnonzero(inst.coverage[:, j])[0])
        x = np.zeros((inst.n_rsus, inst.n_sds), dtype=np.int64)
        x[i, k] = 1
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        y[i, j, k] = 1
        baseline = models.total_energy(x, np.zeros_like(y), inst)
        served = models.total_energy(x, y, inst)
        delta = inst.rsu_energy_coef[i, j, k] - inst.bs_energy_coef[j, k]
        assert served - baseline == pytest.approx(delta)


class TestLatency:
    def test_sojourn_unstable_raises(self):
        y = np.ones((1, 1, 1), dtype=np.int64) * 5
        with pytest.raises(DomainError, match="queue unstable"):
            models.sojourn_latency_rsu(0, y, 5.0)

    def test_zero_demand_region_has_zero_delay(self):
        inst = make_tiny_instance(1)
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        delays = models.region_delays(y, inst)
        for j in range(inst.n_regions):
            if inst.demand[j].sum() == 0:
                assert delays[j] == 0.0

    def test_response_latency_matches_region_delays(self):
        inst = make_tiny_instance(2)
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        for j in range(inst.n_regions):
            demanded = np.flatnonzero(inst.demand[j] > 0)
            if len(demanded):
                i = int(np.flatnonzero(inst.coverage[:, j])[0])
                y[i, j, demanded[0]] = 1
        delays = models.region_delays(y, inst)
        for j in range(inst.n_regions):
            assert delays[j] == pytest.approx(models.response_latency(j, y, inst))

    def test_clamp_saturates_instead_of_raising(self):
        inst = make_tiny_instance(0)
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        j, k = np.argwhere(inst.demand > 0)[0]
        i = int(np.flatnonzero(inst.coverage[:, j])[0])
        y[i, j, k] = int(inst.service_rates[i]) + 3
        delays = models.region_delays(y, inst, clamp=True)
        assert np.isfinite(delays).all()


class TestValidate:
    def test_feasible_empty_report(self):
        inst = make_tiny_instance(0)
        x = np.zeros((inst.n_rsus, inst.n_sds), dtype=np.int64)
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        assert models.validate(x, y, inst).feasible

    def test_storage_violation_detected(self):
        inst = make_tiny_instance(0)
        x = np.ones((inst.n_rsus, inst.n_sds), dtype=np.int64)
        big = inst.sizes.sum()
        if big <= inst.storage.min():
            pytest.skip("catalog fits everywhere in this draw")
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        report = models.validate(x, y, inst)
        overfull = np.flatnonzero((inst.sizes[None] * x).sum(axis=1) > inst.storage)
        assert len(report.of("C3")) == len(overfull)

    def test_unbacked_allocation_is_c4(self):
        inst = make_tiny_instance(0)
        x = np.zeros((inst.n_rsus, inst.n_sds), dtype=np.int64)
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        j, k = np.argwhere(inst.demand > 0)[0]
        i = int(np.flatnonzero(inst.coverage[:, j])[0])
        y[i, j, k] = 1
        report = models.validate(x, y, inst)
        assert report.of("C4")

    def test_overdemand_is_c5(self):
        inst = make_tiny_instance(0)
        x = np.ones((inst.n_rsus, inst.n_sds), dtype=np.int64)
        y = np.zeros((inst.n_rsus, inst.n_regions, inst.n_sds), dtype=np.int64)
        j, k = np.argwhere(inst.demand > 0)[0]
        i = int(np.flatnonzero(inst.coverage[:, j])[0])
        y[i, j, k] = int(inst.demand[j, k]) + 2
        report = models.validate(x, y, inst)
        assert report.of("C5")

    @given(seed=st.integers(0, 500), dseed=st.integers(0, 500))
    @settings(max_examples=60, deadline=None)
    def test_slacks_nonnegative(self, seed, dseed):
        inst = make_tiny_instance(seed)
        x, y = random_decision(inst, np.random.default_rng(dseed))
        report = models.validate(x, y, inst)
        assert all(v.slack >= 0 for v in report.violations)
