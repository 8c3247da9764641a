from composite_loop import checks, design


def test_all_checks_pass():
    results = checks.run_checks()
    assert [r.name for r in results] == list(checks.CHECKS)
    assert all(r.passed for r in results), "\n".join(r.line() for r in results)


def test_check_lines_format():
    res = checks.CheckResult("x", True, "ok", 0.123)
    assert res.line() == "[PASS] x: ok (0.12s)"
    assert checks.CheckResult("x", False, "bad", 0.0).line().startswith("[FAIL]")


def test_integrator_check_advises_more_steps():
    ok, detail = checks.check_integrator(steps_per_segment=4)
    assert not ok and "increase --steps-per-segment" in detail


def test_integrator_check_too_coarse_but_allowed():
    ok, detail = checks.check_integrator(steps_per_segment=16)
    assert not ok and "increase" in detail


def test_phase_gate_check_catches_perturbed_table(monkeypatch):
    monkeypatch.setitem(design.UNIVERSAL_TABLE, 5, ((0, 5, 3, 5, 0), 6))
    ok, _ = checks.check_phase_gate()
    assert not ok


def test_table_check_catches_perturbed_broadband(monkeypatch):
    broken = design.PhaseSchedule((0.0, 1.0, 0.0), "broadband")
    monkeypatch.setattr(design, "broadband_phases", lambda n: broken)
    ok, _ = checks.check_tables()
    assert not ok


def test_check_exceptions_become_failures(monkeypatch):
    def boom(**_):
        raise RuntimeError("kaput")

    monkeypatch.setitem(checks.CHECKS, "J commutators", boom)
    res = {r.name: r for r in checks.run_checks()}
    assert not res["J commutators"].passed
    assert "kaput" in res["J commutators"].detail
