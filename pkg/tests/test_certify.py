"""Integer-infeasibility certificates for three-dimensional size targets."""

from __future__ import annotations

import json

import numpy as np
import pytest

from linefree.certify import (
    INFEASIBLE,
    UNKNOWN,
    ExclusionInstance,
    class_distributions,
    make_instance,
    null_weights,
    pair_coefficients,
    prove_infeasible,
    rich_pencil_multisets,
)


def sorted_multisets(inst: ExclusionInstance) -> set[tuple[int, ...]]:
    return {tuple(sorted(m)) for m in rich_pencil_multisets(inst)}


# --- the 74-point target in dimension three over F_5 ------------------------


def test_target_74_is_infeasible_with_expected_intermediates():
    cert = prove_infeasible(make_instance(5, 74))
    assert cert.verdict == INFEASIBLE
    assert cert.instance.allowed_sizes == (10, 11, 14, 15, 16)
    assert [sorted(d) for d in cert.distributions] == [
        [10, 16, 16, 16, 16],
        [11, 15, 16, 16, 16],
        [14, 14, 14, 16, 16],
        [14, 14, 15, 15, 16],
        [14, 15, 15, 15, 15],
    ]
    assert cert.coefficients == (525, 520, 513, 512, 511)
    assert cert.instance.pair_rhs == 16206
    assert cert.weights == {16: 1, 15: -2, 14: -5}
    assert cert.candidate_count == 11
    assert cert.refuted_count == 11
    assert cert.witness is None


def test_target_74_paper_faithful_mode_differs_only_in_caps():
    derived = prove_infeasible(make_instance(5, 74))
    faithful = prove_infeasible(make_instance(5, 74), paper_faithful=True)
    assert derived.verdict == faithful.verdict == INFEASIBLE
    assert derived.distributions == faithful.distributions
    assert derived.weights == faithful.weights
    assert derived.rich_caps[14] == 13  # combination bound beats the stated cap
    assert faithful.rich_caps[14] == 14
    assert derived.rich_caps[15] == faithful.rich_caps[15] == 15
    assert faithful.candidate_count == derived.candidate_count == 11


def test_pair_equation_matches_hand_count():
    # Two distinct points span one line, and a line in dimension three
    # lies in exactly p + 1 planes, so summing C(plane size, 2) over all
    # planes of all parallel classes counts every point pair p + 1 times.
    inst = make_instance(5, 74)
    assert inst.pair_rhs == 74 * 73 // 2 * 6


def test_class_distribution_enumeration_is_exact():
    inst = make_instance(5, 74)
    dists = class_distributions(inst)
    # brute force: all nondecreasing 5-tuples of allowed sizes summing to 74
    import itertools

    brute = [
        t
        for t in itertools.combinations_with_replacement(inst.allowed_sizes, 5)
        if sum(t) == 74
    ]
    assert sorted(dists) == sorted(brute)
    assert pair_coefficients(dists) == tuple(
        sum(m * (m - 1) // 2 for m in d) for d in dists
    )


# --- the 243-point target in dimension three over F_7 ------------------------


def test_target_243_is_infeasible_with_derived_intermediates():
    inst = make_instance(7, 243)
    cert = prove_infeasible(inst)
    assert cert.verdict == INFEASIBLE
    assert inst.allowed_sizes == (27, 28, 29, 33, 34, 35, 36)
    assert sorted_multisets(inst) == {
        (33, 36, 36, 36, 36, 36, 36, 36),
        (34, 35, 36, 36, 36, 36, 36, 36),
        (35, 35, 35, 36, 36, 36, 36, 36),
    }
    assert cert.weights == {36: 3, 35: -5, 34: -13, 33: -21}
    assert cert.candidate_count == 29543
    assert cert.refuted_count == 29543
    assert cert.witness is None


# --- soundness guards ---------------------------------------------------------


def test_achievable_target_is_never_refuted():
    # 70 points are attained by a bundled set, so UNKNOWN is the only
    # acceptable verdict.
    cert = prove_infeasible(make_instance(5, 70))
    assert cert.verdict == UNKNOWN


def test_target_73_survives_on_a_candidate():
    cert = prove_infeasible(make_instance(5, 73))
    assert cert.verdict == UNKNOWN
    assert cert.witness is not None
    assert len(cert.witness) == len(cert.distributions)
    assert sum(cert.witness) == cert.instance.num_classes


def test_monotone_family_of_refutations():
    assert prove_infeasible(make_instance(5, 75)).verdict == INFEASIBLE
    assert prove_infeasible(make_instance(5, 76)).verdict == INFEASIBLE
    assert prove_infeasible(make_instance(7, 244)).verdict == INFEASIBLE


def test_pigeonhole_shortcut():
    cert = prove_infeasible(make_instance(5, 81))
    assert cert.verdict == INFEASIBLE
    assert cert.reason.startswith("pigeonhole")
    assert cert.candidate_count == 0


def test_unknown_prime_requires_explicit_caps():
    with pytest.raises(ValueError):
        make_instance(11, 900)
    inst = make_instance(11, 1300, plane_cap=100, sub_cap=90)
    assert inst.plane_cap == 100


# --- replay, digests, and serialization ---------------------------------------


def test_replay_is_bit_exact():
    cert = prove_infeasible(make_instance(5, 74))
    assert cert.replay()
    assert cert.replay(threads=2)


def test_digest_is_thread_invariant():
    a = prove_infeasible(make_instance(5, 73))
    b = prove_infeasible(make_instance(5, 73), threads=4)
    assert a.digest == b.digest
    assert np.array_equal(a.margins, b.margins)
    assert a.witness == b.witness


def test_certificate_serializes_to_json():
    cert = prove_infeasible(make_instance(5, 74))
    d = json.loads(cert.to_json())
    assert d["verdict"] == INFEASIBLE
    assert d["digest"] == cert.digest
    assert d["candidates"] is not None  # small log embeds the full table
    text = cert.render_text()
    assert "INFEASIBLE" in text and cert.digest in text


def test_null_weights_annihilate_pencil_multisets():
    # The weight vector w must satisfy sum(w[s] * count_s(M)) equal for
    # all rich pencil multisets M (the defining null-space property).
    for p, t in [(5, 74), (7, 243)]:
        inst = make_instance(p, t)
        w = null_weights(inst)
        vals = {
            sum(w.get(s, 0) * m.count(s) for s in set(m))
            for m in rich_pencil_multisets(inst)
        }
        assert len(vals) == 1
