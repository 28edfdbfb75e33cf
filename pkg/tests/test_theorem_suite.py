import json
import math

import numpy as np
import pytest

from leakage.capacity_solver import maximal_alpha_leakage
from leakage.errors import AlphaOutOfRange, DimensionMismatch, InfeasibleTarget, InvalidCopies
from leakage.prob_core import (
    bsc,
    identity_channel,
    make_channel,
    make_distribution,
    rank_one_channel,
    reverse_deterministic_channel,
    uniform,
)
from models.check_node import CheckNode
from models.prob_model import AlphaOrder
from models.results import TheoremVerdict
from theorem_suite.checks import (
    check_alpha_one_gap,
    check_bounds,
    check_composition,
    check_dpi,
    check_monotonicity,
    check_quasiconvexity,
    check_shatter_capacity,
    check_sibson_infimum,
    shatter_construction,
)
from theorem_suite.engine import find_leaf_nodes, post_order_traversal, run_suite, save_tree_structure
from theorem_suite.instances import generate_instance, random_instances
from theorem_suite.schema import bounds_run, check_tree
from theorem_suite.witness import replay_witness
from theorem_suite.witness_store import WitnessStore
from tests.helpers import SIBSON_BSC_ALPHA2, random_channel, random_distribution

INF = AlphaOrder.of("inf")
ALPHA2 = AlphaOrder.of(2)


def _by_id(verdicts):
    return {v.theorem_id: v for v in verdicts}


class TestVerdict:

    def test_inequality(self):
        assert TheoremVerdict("t", lhs=1.0, rhs=1.0 - 1e-9, slack=1e-8).passed
        assert not TheoremVerdict("t", lhs=1.0, rhs=0.9, slack=1e-8).passed

    def test_equality(self):
        assert TheoremVerdict("t", lhs=1.0, rhs=1.0 + 1e-10, slack=1e-9, relation="eq").passed
        assert not TheoremVerdict("t", lhs=1.0, rhs=0.0, slack=1e-9, relation="eq").passed

    def test_side_conditions(self):
        verdict = TheoremVerdict("t", lhs=0.0, rhs=1.0, slack=0.0, details={"side_ok": True})
        assert verdict.passed
        verdict.add_side("extra", False)
        assert not verdict.passed

    def test_digest_depends_on_witness(self):
        a = TheoremVerdict("t", 0.0, 0.0, 0.0, witness={"x": 1})
        b = TheoremVerdict("t", 0.0, 0.0, 0.0, witness={"x": 2})
        assert a.instance_digest != b.instance_digest
        assert len(a.instance_digest) == 16

    def test_json_line(self):
        record = json.loads(TheoremVerdict("t", 0.5, 1.0, 1e-8, seed=3).to_json_line())
        assert {"theorem_id", "seed", "passed", "lhs", "rhs", "slack", "witness"} <= set(record)
        assert record["seed"] == 3


class TestQuasiconvexity:

    def test_same_channel(self):
        verdict = check_quasiconvexity(bsc(0.1), bsc(0.1), uniform(2), ALPHA2)
        assert verdict.passed
        assert verdict.lhs == pytest.approx(0.0, abs=1e-12)

    def test_identity_and_rank_one(self):
        verdict = check_quasiconvexity(identity_channel(2), rank_one_channel([0.5, 0.5], 2), uniform(2), ALPHA2)
        assert verdict.passed
        assert verdict.details["l0"] == pytest.approx(math.log(2), abs=1e-9)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            check_quasiconvexity(bsc(0.1), identity_channel(3), uniform(2), ALPHA2)

    @pytest.mark.parametrize("a", [1, 2, "inf"])
    def test_random_pairs(self, a):
        rng = np.random.default_rng(7)
        for _ in range(20):
            verdict = check_quasiconvexity(random_channel(rng, 3, 3), random_channel(rng, 3, 3),
                                           random_distribution(rng, 3), AlphaOrder.of(a))
            assert verdict.passed, verdict.to_dict()


class TestDataProcessing:

    def test_bsc_chain_infinity(self):
        xy, yz = check_dpi(bsc(0.1), bsc(0.1), uniform(2), INF)
        assert xy.lhs == pytest.approx(math.log(1.64), abs=1e-12)
        assert xy.rhs == pytest.approx(math.log(1.8), abs=1e-12)
        assert yz.rhs == pytest.approx(math.log(1.8), abs=1e-12)
        assert xy.passed and yz.passed

    def test_identity_post_processing_is_tight(self):
        xy, _ = check_dpi(bsc(0.2), identity_channel(2), uniform(2), ALPHA2)
        assert xy.lhs == pytest.approx(xy.rhs, abs=1e-10)
        assert xy.passed

    def test_incompatible_shapes(self):
        with pytest.raises(DimensionMismatch):
            check_dpi(bsc(0.1), identity_channel(3), uniform(2), ALPHA2)

    @pytest.mark.parametrize("a", [1, 2, "inf"])
    def test_random_chains(self, a):
        rng = np.random.default_rng(11)
        for _ in range(20):
            verdicts = check_dpi(random_channel(rng, 3, 4), random_channel(rng, 4, 3),
                                 random_distribution(rng, 3), AlphaOrder.of(a))
            assert all(v.passed for v in verdicts)


class TestComposition:

    def test_bsc_pair_infinity(self):
        verdict = check_composition(bsc(0.1), bsc(0.2), uniform(2), INF)
        assert verdict.lhs == pytest.approx(math.log(1.8), abs=1e-12)
        assert verdict.rhs == pytest.approx(math.log(1.8) + math.log(1.6), abs=1e-12)
        assert verdict.passed

    def test_rank_one_partner(self):
        verdict = check_composition(bsc(0.1), rank_one_channel([0.3, 0.7], 2), uniform(2), ALPHA2)
        assert verdict.lhs == pytest.approx(SIBSON_BSC_ALPHA2, abs=1e-8)
        assert verdict.passed

    def test_input_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            check_composition(bsc(0.1), identity_channel(3), uniform(2), ALPHA2)

    @pytest.mark.parametrize("a", [1, 1.5, 2, "inf"])
    def test_random_pairs(self, a):
        rng = np.random.default_rng(13)
        for _ in range(20):
            verdict = check_composition(random_channel(rng, 3, 2), random_channel(rng, 3, 3),
                                        random_distribution(rng, 3), AlphaOrder.of(a))
            assert verdict.passed, verdict.to_dict()


class TestBounds:

    @pytest.mark.parametrize("a", [1, 2, "inf"])
    def test_rank_one(self, a):
        verdicts = _by_id(check_bounds(rank_one_channel([0.2, 0.8], 3), uniform(3), AlphaOrder.of(a)))
        assert all(v.passed for v in verdicts.values())
        assert verdicts["bounds.zero_iff"].details["rank_one"]
        assert verdicts["bounds.nonneg"].rhs == pytest.approx(0.0, abs=1e-9)

    def test_reverse_deterministic_order_two(self):
        channel, prior = reverse_deterministic_channel([0, 0, 1], uniform(3))
        verdicts = _by_id(check_bounds(channel, prior, ALPHA2))
        assert verdicts["bounds.deterministic"].passed
        assert verdicts["bounds.deterministic"].lhs == pytest.approx(math.log(2), abs=1e-8)

    def test_reverse_deterministic_order_one(self):
        channel, prior = reverse_deterministic_channel([0, 0, 1], uniform(3))
        np.testing.assert_allclose(prior.probs, [2 / 3, 1 / 3])
        verdicts = _by_id(check_bounds(channel, prior, AlphaOrder.of(1)))
        assert verdicts["bounds.deterministic"].lhs == pytest.approx(0.6365, abs=1e-4)
        assert verdicts["bounds.deterministic"].passed
        assert "bounds.uniform_sibson" not in verdicts

    def test_upper_bound_uses_prior_support(self):
        prior = make_distribution([0.5, 0.5, 0.0])
        verdicts = _by_id(check_bounds(identity_channel(3), prior, ALPHA2))
        assert verdicts["bounds.upper"].rhs == pytest.approx(math.log(2))
        assert verdicts["bounds.upper"].passed

    def test_rejects_alpha_below_one(self):
        with pytest.raises(AlphaOutOfRange):
            check_bounds(bsc(0.1), uniform(2), AlphaOrder.of(0.5))

    def test_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            channel, prior = random_channel(rng, 3, 3), random_distribution(rng, 3)
            for a in (1, 1.5, 2, "inf"):
                verdicts = check_bounds(channel, prior, AlphaOrder.of(a))
                assert all(v.passed for v in verdicts), [v.to_dict() for v in verdicts if not v.passed]


class TestSibsonInfimum:

    def test_bsc_uniform(self):
        verdict = check_sibson_infimum(uniform(2), bsc(0.1), ALPHA2)
        assert verdict.passed
        assert verdict.details["side_tilted_equality"]
        assert verdict.details["marginal_divergence"] >= 0.4946

    def test_random_instances(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            prior, channel = random_distribution(rng, 3), random_channel(rng, 3, 4)
            for a in (0.5, 1.5, 2, 5):
                assert check_sibson_infimum(prior, channel, AlphaOrder.of(a), trials=50).passed

    def test_needs_finite_alpha(self):
        with pytest.raises(AlphaOutOfRange):
            check_sibson_infimum(uniform(2), bsc(0.1), INF)


class TestShatter:

    def test_target_equals_prior(self):
        prior = make_distribution([0.3, 0.7])
        spec, verdict = shatter_construction(prior, bsc(0.1), prior, [1, 1], ALPHA2)
        assert verdict.passed
        assert spec.u_to_x == (0, 1)
        np.testing.assert_allclose(spec.induced_x_tilde.probs, prior.probs, atol=1e-12)

    def test_uniform_target_with_copies(self):
        spec, verdict = shatter_construction(uniform(2), bsc(0.1), uniform(2), {0: 2, 1: 3}, ALPHA2)
        assert verdict.passed, verdict.to_dict()
        assert spec.u_to_x == (0, 0, 1, 1, 1)
        assert spec.lifted_channel.rows.shape == (5, 2)
        assert verdict.details["side_x_determined_by_u"]
        np.testing.assert_allclose(spec.induced_x_tilde.probs, [0.5, 0.5], atol=1e-12)

    @pytest.mark.parametrize("a", [1, 1.5, 2, 5, "inf"])
    def test_random_targets(self, a):
        rng = np.random.default_rng(23)
        for _ in range(10):
            prior, channel = random_distribution(rng, 3), random_channel(rng, 3, 3)
            target = random_distribution(rng, 3)
            copies = [int(k) for k in rng.integers(1, 4, size=3)]
            _, verdict = shatter_construction(prior, channel, target, copies, AlphaOrder.of(a))
            assert verdict.passed, verdict.to_dict()

    @pytest.mark.parametrize("a", [1.5, 2, "inf"])
    def test_capacity_target_reaches_capacity(self, a):
        alpha = AlphaOrder.of(a)
        prior, channel = uniform(3), make_channel([[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]])
        result = maximal_alpha_leakage(prior, channel, alpha)
        _, verdict = shatter_construction(prior, channel, result.argmax_input, [2, 1, 3], alpha)
        assert verdict.passed
        assert verdict.lhs == pytest.approx(result.nats, abs=1e-8)

    @pytest.mark.parametrize("a", [1, 1.5, 2, 10, "inf"])
    def test_capacity_check(self, a):
        channel = make_channel([[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]])
        verdict = check_shatter_capacity(uniform(3), channel, [2, 1, 3], AlphaOrder.of(a))
        assert verdict.passed, verdict.to_dict()
        assert verdict.theorem_id == "shatter.capacity"
        assert verdict.witness["check"] == "shatter_capacity"
        assert verdict.details["side_induced_matches_target"]
        assert verdict.details["side_sibson_matches_shatter"]

    def test_target_outside_prior_support(self):
        with pytest.raises(InfeasibleTarget):
            shatter_construction(make_distribution([1.0, 0.0]), bsc(0.1), uniform(2), [1, 1], ALPHA2)

    def test_zero_copies(self):
        with pytest.raises(InvalidCopies):
            shatter_construction(uniform(2), bsc(0.1), uniform(2), [0, 1], ALPHA2)

    def test_rejects_alpha_below_one(self):
        with pytest.raises(AlphaOutOfRange):
            shatter_construction(uniform(2), bsc(0.1), uniform(2), [1, 1], AlphaOrder.of(0.5))


class TestOrderChecks:

    def test_monotonicity(self):
        verdict = check_monotonicity(bsc(0.1), uniform(2))
        assert verdict.passed
        assert len(verdict.details["values"]) == 6

    def test_alpha_one_gap(self):
        verdict = check_alpha_one_gap(bsc(0.1), make_distribution([0.2, 0.8]))
        assert verdict.passed
        assert verdict.details["gap"] > 0.0


class TestReplay:

    def test_replay_is_bit_identical(self, rng):
        prior, channel = random_distribution(rng, 3), random_channel(rng, 3, 3)
        original = check_composition(channel, random_channel(rng, 3, 2), prior, AlphaOrder.of(1.5))
        record = json.loads(original.to_json_line())
        replayed = replay_witness(record)
        assert replayed.lhs == original.lhs
        assert replayed.rhs == original.rhs
        assert replayed.instance_digest == original.instance_digest

    def test_replay_pair_and_shatter(self):
        _, yz = check_dpi(bsc(0.1), bsc(0.2), make_distribution([0.4, 0.6]), ALPHA2)
        assert replay_witness(yz.to_dict()).rhs == yz.rhs
        _, shatter = shatter_construction(uniform(2), bsc(0.1), uniform(2), {0: 2, 1: 3}, ALPHA2)
        assert replay_witness(json.loads(shatter.to_json_line())).lhs == shatter.lhs

    def test_capacity_target_replay_recomputes_side_conditions(self):
        original = check_shatter_capacity(make_distribution([0.3, 0.7]), bsc(0.1), [2, 1], ALPHA2)
        record = json.loads(original.to_json_line())
        record["passed"] = False
        record["details"]["side_sibson_matches_shatter"] = False
        replayed = replay_witness(record)
        assert replayed.theorem_id == "shatter.capacity"
        assert replayed.lhs == original.lhs
        assert replayed.rhs == original.rhs
        assert replayed.details["side_sibson_matches_shatter"]
        assert replayed.details["solver_converged"]
        assert replayed.passed


class TestInstances:

    def test_seeded(self):
        a, b = generate_instance(5), generate_instance(5)
        assert a.to_dict() == b.to_dict()

    def test_shapes(self):
        for instance in random_instances(10, seed=1):
            n_in, n_out = instance.channel.rows.shape
            assert instance.partner.rows.shape == (n_in, n_out)
            assert instance.post.in_size == n_out
            assert instance.prior.alphabet_size == instance.target.alphabet_size == n_in
            assert len(instance.copies) == n_in
            assert min(instance.copies) >= 1

    def test_seed_stride(self):
        assert [i.seed for i in random_instances(3, seed=2)] == [20000, 20001, 20002]


class TestEngine:

    def test_tree_traversal(self):
        keys = [leaf.key for leaf in find_leaf_nodes(check_tree)]
        assert keys[0] == "quasiconvexity"
        assert "shatter.capacity_target" in keys
        depths = [depth for _, depth in post_order_traversal(check_tree)]
        assert depths == sorted(depths, reverse=True)

    def test_run_suite_counts(self):
        leaf = CheckNode(key="bounds", name="Bounds", alphas=["2", "inf"], run=bounds_run)
        root = CheckNode(key="root", name="Root", children=[leaf])
        report = run_suite(root, random_instances(2, seed=3), max_workers=2)
        assert report.all_passed
        assert report.counts["root"] == report.counts["bounds"]
        assert report.counts["root"]["passed"] == len(report.verdicts)
        assert report.witness_file is None
        assert {v.seed for v in report.verdicts} == {30000, 30001}

    def test_check_errors_become_failures(self, tmp_path):
        def broken(instance, alpha):
            raise InvalidCopies("bad copies")

        root = CheckNode(key="root", name="Root",
                         children=[CheckNode(key="broken", name="Broken", alphas=["2"], run=broken)])
        store = WitnessStore(str(tmp_path))
        report = run_suite(root, random_instances(1), store=store)
        assert not report.all_passed
        assert report.counts["root"] == {"passed": 0, "failed": 1}
        assert report.witness_file == str(store.witness_file)
        assert "InvalidCopies" in report.failed[0].details["error"]

    def test_unexpected_errors_do_not_stop_the_suite(self):
        def crashing(instance, alpha):
            raise ZeroDivisionError("division by zero")

        root = CheckNode(key="root", name="Root", children=[
            CheckNode(key="crashing", name="Crashing", alphas=["2"], run=crashing),
            CheckNode(key="bounds", name="Bounds", alphas=["2"], run=bounds_run),
        ])
        report = run_suite(root, random_instances(2, seed=3), max_workers=2)
        assert report.counts["crashing"] == {"passed": 0, "failed": 2}
        assert report.counts["bounds"]["failed"] == 0
        assert report.counts["bounds"]["passed"] > 0
        assert all("ZeroDivisionError" in v.details["error"] for v in report.failed)

    @pytest.mark.slow
    def test_full_tree_passes(self):
        report = run_suite(check_tree, random_instances(20, seed=0))
        assert report.all_passed, [v.to_dict() for v in report.failed]

    def test_save_tree_structure(self, tmp_path):
        path = tmp_path / "nested" / "check_tree.json"
        save_tree_structure(check_tree, str(path))
        tree = json.loads(path.read_text(encoding="utf-8"))
        assert tree["key"] == "root"
        assert [child["key"] for child in tree["children"]] == [
            "channel_properties", "bounds", "order_properties", "variational"]
