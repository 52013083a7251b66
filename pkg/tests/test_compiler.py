import json
import math
import os

import numpy as np
import pytest

from fieldforge.circuits import GateSpec, LogicalCircuit, ideal_unitary, insert_swaps
from fieldforge.compiler import (
    CompileParams,
    CompiledFields,
    ResourceEstimate,
    ScalingConfig,
    compile,
    compute_sampling,
    infidelity_budget,
    native_entangling_phases,
    simulate_schedule,
)
from fieldforge.errors import (
    BudgetExceeded,
    InfeasibleGate,
    ValidationError,
)

ALPHA, BETA = native_entangling_phases()
FAST = CompileParams(eps=0.5)


@pytest.fixture(scope="module")
def mixed_circuit():
    return LogicalCircuit(3, (
        GateSpec("zrot", (0,), angle=0.7),
        GateSpec("xrot", (1,), angle=0.9),
        GateSpec("entangling", (0, 1), alpha=ALPHA, beta=BETA),
        GateSpec("entangling", (0, 2), alpha=ALPHA, beta=BETA),
        GateSpec("swap", (1, 2)),
    ))


@pytest.fixture(scope="module")
def compiled(mixed_circuit):
    return compile(mixed_circuit, FAST)


def test_native_phases_are_stable():
    a, b = native_entangling_phases()
    assert a == pytest.approx(-1.9371370571925546, abs=1e-9)
    assert b == pytest.approx(1.8346357433563387, abs=1e-9)
    assert abs(math.remainder(a + b, 2.0 * math.pi)) > 1e-3


def test_resource_estimate_from_counts():
    est = ResourceEstimate.from_counts(4, 10, 10, ScalingConfig())
    assert est.t_prep == 65536.0          # n^8 dominates G^2
    assert est.lam == pytest.approx(0.1)
    assert est.gate_time == pytest.approx(100.0)
    assert est.total_gate_time == pytest.approx(1000.0)
    assert est.volume == pytest.approx(4.0 * (1.0 + math.log(4.0)))
    assert est.bit_count == pytest.approx(4.0 * 100.0 * 10.0)
    small = ResourceEstimate.from_counts(2, 100, 100, ScalingConfig())
    assert small.t_prep == 10000.0        # G^2 dominates n^8


def test_resource_estimate_validation():
    est = ResourceEstimate.from_counts(2, 5, 5, ScalingConfig())
    with pytest.raises(ValidationError):
        ResourceEstimate(**{**est.__dict__, "lam": 0.0})
    with pytest.raises(ValidationError):
        # lam G beyond the prefactor budget
        ResourceEstimate(**{**est.__dict__, "lam": 1.0})


def test_volume_scaling_near_linear():
    vols = [ResourceEstimate.from_counts(n, 4, 4, ScalingConfig()).volume
            for n in (2, 4, 8)]
    for n, v in zip((2, 4, 8), vols):
        assert v <= 1.0 * n * (1.0 + math.log(n)) * (1.0 + 1e-12)
        assert v >= n


def test_compile_params_resolved():
    m, depth, width, intra, tau_z = CompileParams().resolved()
    assert (m, depth, width, intra, tau_z) == (1.0, 0.4, 1.0, 4.0, 40.0)
    m2 = CompileParams(m=2.0).resolved()
    assert m2[1] == pytest.approx(1.6)
    assert m2[2] == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        CompileParams(well_depth=0.6).resolved()
    with pytest.raises(ValidationError):
        CompileParams(m=-1.0).resolved()
    with pytest.raises(ValidationError):
        ScalingConfig(oversampling=0.5)


def test_sampling_quadruples_when_mass_doubles():
    n1 = compute_sampling(100.0, 50.0, 1.0, 1.0)
    n2 = compute_sampling(100.0, 50.0, 2.0, 2.0)
    ratio = (n2[0] * n2[1]) / (n1[0] * n1[1])
    assert ratio == pytest.approx(4.0, rel=0.05)
    with pytest.raises(ValidationError):
        compute_sampling(-1.0, 50.0, 1.0, 1.0)


def test_window_sequence(compiled):
    labels = [w.label for w in compiled.windows]
    assert labels == ["j2_rampup", "prep", "gate:zrot", "gate:xrot",
                      "gate:entangling", "gate:swap", "gate:entangling",
                      "gate:swap", "gate:swap", "reverse_prep", "j2_rampdown"]
    for w in compiled.windows:
        assert w.t_end > w.t_start
    zrot = compiled.windows[2]
    assert zrot.t_end - zrot.t_start == pytest.approx(40.0)
    prep = compiled.windows[1]
    assert prep.calibration["eps"] == 0.5
    assert prep.calibration["prep_infidelity_bound"] == 0.5


def test_routing_happens_inside_compile(compiled, mixed_circuit):
    assert compiled.resources.gate_count == 7
    assert compiled.metadata["gate_count"] == 7
    assert compiled.resources.lam == pytest.approx(1.0 / 7.0)


def test_j1_antisymmetric_bit_exact(compiled):
    assert np.array_equal(compiled.j1[::-1], -compiled.j1)


def test_fields_vanish_at_boundaries(compiled):
    peak = np.max(np.abs(compiled.j1))
    assert peak > 0
    assert np.max(np.abs(compiled.j1[0])) == 0.0
    assert np.max(np.abs(compiled.j1[:, [0, -1]])) < 1e-12 * peak
    assert np.max(np.abs(compiled.j2[0])) == 0.0
    assert np.max(np.abs(compiled.j2[-1])) == 0.0
    # switched-on region carries the full double-well layout
    mid = compiled.j2[compiled.t.size // 2]
    assert mid.min() < -0.3


def test_sample_cap_enforced(mixed_circuit):
    with pytest.raises(BudgetExceeded):
        compile(mixed_circuit, FAST, ScalingConfig(sample_cap=100_000))


def test_non_native_phases_rejected():
    circ = LogicalCircuit(2, (
        GateSpec("entangling", (0, 1), alpha=0.3, beta=0.4),))
    with pytest.raises(InfeasibleGate):
        compile(circ, FAST)


def test_replay_matches_ideal_unitary(compiled, mixed_circuit):
    report = simulate_schedule(compiled)
    ideal = ideal_unitary(insert_swaps(mixed_circuit))
    assert np.max(np.abs(report.logical_unitary - ideal)) < 1e-9
    assert report.metadata["model_level"] == "gate_models"
    assert "proxy" in report.metadata["vacuum_return_note"]
    with pytest.raises(ValidationError):
        simulate_schedule(compiled, model_level="fields")


def test_infidelity_accounting(compiled):
    report = simulate_schedule(compiled)
    lam = compiled.resources.lam
    # 2 prep windows x 3 qubits x bound, plus per-gate lam with swap tripled
    expect = 2 * 3 * 0.5 + (4 + 3 * 3) * lam
    assert report.total_infidelity == pytest.approx(expect, rel=1e-9)
    budget = infidelity_budget(report, compiled)
    assert budget == pytest.approx(3 * 2 * 0.5 + 7 * 3 * lam, rel=1e-9)
    assert report.total_infidelity <= budget * (1.0 + 1e-12)


def test_vacuum_return_formula(compiled):
    report = simulate_schedule(compiled)
    amp2 = abs(report.logical_unitary[0, 0]) ** 2
    assert report.vacuum_return_probability == pytest.approx(
        amp2 * (1.0 - 0.5) ** 6, rel=1e-12)


def test_empty_circuit_compile():
    fields = compile(LogicalCircuit(1, ()), FAST)
    labels = [w.label for w in fields.windows]
    assert labels == ["j2_rampup", "prep", "reverse_prep", "j2_rampdown"]
    report = simulate_schedule(fields)
    np.testing.assert_allclose(report.logical_unitary, np.eye(2), atol=0.0)
    assert report.total_infidelity == pytest.approx(2 * 1 * 0.5)
    assert report.vacuum_return_probability == pytest.approx(0.25)


def test_config_hash_tracks_inputs(mixed_circuit, compiled):
    again = compile(mixed_circuit, FAST)
    assert again.config_hash == compiled.config_hash
    other = compile(mixed_circuit, CompileParams(eps=0.45))
    assert other.config_hash != compiled.config_hash
    assert len(compiled.config_hash) == 64


def test_save_load_round_trip(compiled, tmp_path):
    compiled.save(tmp_path, csv_fallback=True)
    loaded = CompiledFields.load(tmp_path)
    assert np.array_equal(loaded.j1, compiled.j1)
    assert np.array_equal(loaded.j2, compiled.j2)
    assert np.array_equal(loaded.t, compiled.t)
    assert np.array_equal(loaded.x, compiled.x)
    assert loaded.config_hash == compiled.config_hash
    assert loaded.resources == compiled.resources
    assert [w.label for w in loaded.windows] == \
        [w.label for w in compiled.windows]
    csv_path = os.path.join(tmp_path, "fields.csv")
    with open(csv_path) as fh:
        head = fh.readline().strip()
        first = fh.readline().strip().split(",")
    assert head == "t,x,j1,j2"
    assert float(first[0]) == compiled.t[0]
    assert float(first[2]) == compiled.j1[0, 0]


def test_load_rejects_corrupt_files(compiled, tmp_path):
    compiled.save(tmp_path)
    with open(tmp_path / "fields.bin", "ab") as fh:
        fh.write(b"\x00" * 8)
    with pytest.raises(ValidationError):
        CompiledFields.load(tmp_path)
    compiled.save(tmp_path)
    header = json.loads((tmp_path / "fields.json").read_text())
    header["format_version"] = 99
    (tmp_path / "fields.json").write_text(json.dumps(header))
    with pytest.raises(ValidationError):
        CompiledFields.load(tmp_path)


def test_extent_grows_near_linearly():
    extents = []
    for n in (2, 4, 8):
        fields = compile(LogicalCircuit(n, ()), FAST)
        extents.append(fields.metadata["extent"])
    assert extents[1] / extents[0] == pytest.approx(2.0, rel=0.1)
    assert extents[2] / extents[1] == pytest.approx(2.0, rel=0.05)
