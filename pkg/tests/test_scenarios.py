import pytest

from mptcpsim.errors import MatrixConfigError
from mptcpsim.scenarios import FAMILIES, load_matrix


def test_default_matrix_cardinality():
    m = load_matrix()
    assert len(m.scenarios) == 29
    assert len(m.schedulers) == 5
    assert len(m.ccas) == 7
    assert m.iterations == 5
    assert len(m) == 5075


def test_family_composition():
    m = load_matrix()
    sizes = {fam: len(ids) for fam, ids in m.families().items()}
    assert sizes == {
        "homogeneous": 3,
        "mild_heterogeneity": 7,
        "intense_heterogeneity": 7,
        "very_intense_heterogeneity": 7,
        "mixed_heterogeneity": 5,
    }


def test_reference_scenarios_present():
    m = load_matrix()
    by_id = {sc.id: sc for sc in m.scenarios}
    hom = by_id["hom_bw_delay"]
    assert (hom.sf1.bw_mbps, hom.sf1.rtt_ms, hom.sf1.loss_pct) == (100, 5, 0)
    assert hom.sf1 == hom.sf2
    intense = by_id["int_bw_delay_loss"]
    assert (intense.sf1.bw_mbps, intense.sf1.rtt_ms, intense.sf1.loss_pct) == (100, 0, 0)
    assert (intense.sf2.bw_mbps, intense.sf2.rtt_ms, intense.sf2.loss_pct) == (50, 20, 0.5)
    mixed = by_id["mix_delay_loss_b"]
    assert (mixed.sf1.bw_mbps, mixed.sf1.rtt_ms, mixed.sf1.loss_pct) == (100, 10, 0)
    assert (mixed.sf2.bw_mbps, mixed.sf2.rtt_ms, mixed.sf2.loss_pct) == (100, 2, 0.5)


def test_l3_fixed_across_scenarios():
    m = load_matrix()
    for sc in m.scenarios:
        assert (sc.l3.bw_mbps, sc.l3.rtt_ms, sc.l3.loss_pct) == (2000, 0, 0)


def test_run_ids_are_unique():
    m = load_matrix()
    ids = [spec.run_id() for spec in m.runs()]
    assert len(ids) == len(set(ids)) == 5075


def test_custom_config_single_cell(tmp_path):
    cfg = tmp_path / "one.ini"
    cfg.write_text("""
[matrix]
schedulers = minrtt
ccas = cubic
iterations = 1
duration_s = 2

[scenario:solo]
family = homogeneous
sf1 = 10, 5, 0
sf2 = 10, 5, 0
""")
    m = load_matrix(str(cfg))
    assert len(m) == 1
    assert m.scenarios[0].duration_s == 2.0


def test_negative_loss_rejected(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("""
[matrix]

[scenario:x]
family = homogeneous
sf1 = 100, 5, -1
sf2 = 100, 5, 0
""")
    with pytest.raises(MatrixConfigError):
        load_matrix(str(cfg))


def test_negative_rate_rejected(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("""
[matrix]

[scenario:x]
family = homogeneous
sf1 = -100, 5, 0
sf2 = 100, 5, 0
""")
    with pytest.raises(MatrixConfigError):
        load_matrix(str(cfg))


def test_unknown_family_rejected(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("""
[matrix]

[scenario:x]
family = chaotic
sf1 = 100, 5, 0
sf2 = 100, 5, 0
""")
    with pytest.raises(MatrixConfigError):
        load_matrix(str(cfg))


def test_missing_file_reported():
    with pytest.raises(MatrixConfigError):
        load_matrix("/nonexistent/matrix.ini")


def test_families_are_the_documented_five():
    assert FAMILIES == (
        "homogeneous", "mild_heterogeneity", "intense_heterogeneity",
        "very_intense_heterogeneity", "mixed_heterogeneity")
