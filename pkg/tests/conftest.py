CRITERIA = {
    1: "closed-form eta matches brute-force model sums",
    2: "reduction identities",
    3: "ARMA(1,1) MSE grid with true optimal bandwidths",
    4: "ARMA(1,1) MSE grid with estimated bandwidths",
    5: "improvement region endpoint at a = 0.9",
    6: "optimal-bandwidth arithmetic",
    7: "multi-model switching",
    8: "mean-test size",
    9: "HAC test size",
    10: "property suites",
}

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): test belongs to acceptance criterion k")


def pytest_runtest_logreport(report):
    marks = dict(report.user_properties).get("criterion")
    if marks is None:
        return
    entry = _results.setdefault(marks, {"ok": True, "n": 0, "seconds": 0.0, "details": []})
    # module fixtures run the experiments, so setup time counts toward the criterion
    entry["seconds"] += report.duration
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["n"] += 1
        entry["ok"] &= report.passed
        if not report.passed:
            entry["details"].append("failed: " + report.nodeid.split("::")[-1])
    if report.when == "call":
        entry["details"] += [val for key, val in report.user_properties if key == "detail"]


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(CRITERIA):
        if k not in _results:
            tr.write_line(f"criterion {k:2d}: NOT RUN  {CRITERIA[k]}")
            continue
        e = _results[k]
        status = "PASS" if e["ok"] and e["n"] else "FAIL"
        tr.write_line(f"criterion {k:2d}: {status}  {CRITERIA[k]}  ({e['n']} tests, {e['seconds']:.1f} s)")
        for d in e["details"]:
            tr.write_line(f"    {d}")
