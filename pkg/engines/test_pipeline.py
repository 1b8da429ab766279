import pytest

from engines.dihedral_orchestrator import (
    NO_CONCLUSION,
    Decision,
    DihedralOrchestrator,
    TowerSpec,
    boston_report,
    check_case,
    classify_prime,
    decide_dihedral,
    minimal_S,
    prime_discriminant,
    scan_primes,
)
from engines.errors import EvenPrime, InvalidTower, PContainedInS
from engines.result_cache import ResultCache


@pytest.fixture
def tower():
    return TowerSpec.build(-23, 3, 5)


@pytest.fixture
def tower7():
    return TowerSpec.build(-23, 3, 7)


def test_tower_fields(tower, tower7):
    assert tower.h == 3
    assert tower.r == 2
    assert tower.field.order == 25
    assert tower7.r == 1
    data = tower.residual_data()
    assert data.q_ad == 3


@pytest.mark.parametrize("args", [
    (-12, 3, 5),
    (-20, 3, 5),
    (-23, 2, 5),
    (-23, 3, 3),
    (-23, 3, 6),
    (-23, 3, 23),
    (-199, 3, 5),
])
def test_invalid_towers(args):
    with pytest.raises(InvalidTower):
        TowerSpec.build(*args)


def test_tower_options():
    with pytest.raises(InvalidTower):
        TowerSpec.build(-23, 3, 5, b=3)
    with pytest.raises(InvalidTower):
        TowerSpec.build(-23, 3, 5, S=(4,))
    with pytest.raises(PContainedInS):
        TowerSpec.build(-23, 3, 5, S=(5, 7))
    assert TowerSpec.build(-23, 3, 23, strict=False).p == 23
    assert TowerSpec.build(-23, 3, 5, b=4).b == 1
    assert TowerSpec.build(-23, 3, 5, S=(11, 2, 11)).S == (2, 11)


def test_classify_p_itself(tower):
    assert classify_prime(tower, 5).verdict == "excluded_p"
    with pytest.raises(ValueError):
        classify_prime(tower, 9)


def test_inert_primes(tower):
    # 11 = 1 and 19 = -1 mod 5; 7 has order 4 mod 5
    assert classify_prime(tower, 11).verdict == "S2"
    assert classify_prime(tower, 19).verdict == "S2"
    assert classify_prime(tower, 7).verdict == "none"


def test_ramified_prime(tower):
    c = classify_prime(tower, 23)
    assert c.evidence["splitting"] == "ramified"
    assert c.verdict == "none"


def test_split_principal_prime(tower):
    # 101 = 1^2 + 1*4 + 6*4^2
    c = classify_prime(tower, 101)
    assert c.verdict == "S1"
    assert c.evidence["class_value"] == 0
    assert c.evidence["decomposition_group"] == "trivial"


def test_split_prime_with_cube_root_of_unity(tower, tower7):
    assert classify_prime(tower, 2).verdict == "none"
    c = classify_prime(tower7, 2)
    assert c.verdict == "S1"
    assert c.evidence["decomposition_group"] == "Z/3"


def test_no_S3_for_odd_q(tower, tower7):
    for t in (tower, tower7):
        assert all(c.verdict != "S3" for c in scan_primes(t, 300))


def test_verdicts_do_not_depend_on_b(tower7):
    other = TowerSpec.build(-23, 3, 7, b=2)
    assert [c.verdict for c in scan_primes(tower7, 200)] == [c.verdict for c in scan_primes(other, 200)]


def test_S_meeting_S0_is_refused(tower7, run_config):
    decision = decide_dihedral(tower7, S=(2,), config=run_config)
    assert decision.verdict == "HypothesesNotMet"
    assert decision.violated == ("S meets S0 at 2 (S1)",)
    assert decision.case is None
    report = decision.to_dict()
    assert report["boston"]["statement"] == NO_CONCLUSION
    assert report["finite_image"] is False


def test_decide_rejects_p_in_S(tower, run_config):
    with pytest.raises(PContainedInS):
        decide_dihedral(tower, S=(5,), config=run_config)


def test_boston_report(tower):
    dihedral = Decision("Dihedral", tower, image_order=6)
    assert boston_report(dihedral) == {
        "finite_image": True,
        "statement": "universal deformation has finite image",
        "image_order": "6",
    }
    assert boston_report(Decision("NotDihedral", tower))["finite_image"] is None


def test_minimal_S(tower):
    primes, entries = minimal_S(tower)
    assert primes == ()
    assert [e.ell for e in entries] == [23]
    assert entries[0].local_image_order == 2
    assert not entries[0].in_S


def test_minimal_S_needs_odd_p():
    with pytest.raises(EvenPrime):
        minimal_S(TowerSpec.build(-23, 3, 2))


@pytest.mark.parametrize("ell, d", [(2, -8), (3, -3), (5, -20), (7, -7), (4219, -4219), (673, -2692)])
def test_prime_discriminant(ell, d):
    assert prime_discriminant(ell) == d


def test_prime_discriminant_needs_prime():
    with pytest.raises(ValueError):
        prime_discriminant(15)


@pytest.mark.slow
def test_hilbert_class_field_of_minus_23_is_dihedral(tower, run_config):
    orchestrator = DihedralOrchestrator(run_config, ResultCache(run_config.cache_dir))
    decision = orchestrator.decide_dihedral(tower)
    assert decision.case.case == "Case1"
    assert decision.case.h_M == 1
    assert decision.verdict == "Dihedral"
    assert decision.presentation.text == "W(F_25)"
    assert decision.image_order == 6
    # second run is served from the cache
    assert orchestrator.decide_dihedral(tower).to_dict() == decision.to_dict()


@pytest.mark.slow
def test_minus_4219_is_not_dihedral(run_config):
    tower = TowerSpec.build(-4219, 3, 5)
    decision = decide_dihedral(tower, config=run_config)
    assert decision.case.case == "Case2"
    assert decision.verdict == "NotDihedral"
    assert decision.reason == "Case2-Hom-nonvanishing"
    assert decision.evidence["infinitesimal_lift"]["dihedral"] is False


@pytest.mark.slow
def test_minus_8059_with_p_7(run_config):
    case = check_case(TowerSpec.build(-8059, 3, 7), run_config)
    assert case.case == "Case2"
    assert case.h_L == 21
