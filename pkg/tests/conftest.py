import numpy as np
from hypothesis import strategies as st


@st.composite
def labelled_pairs(draw, max_T=80, min_T=4):
    """(labels, detections, l_nm) with at least one anomaly."""
    T = draw(st.integers(min_T, max_T))
    labels = np.array(draw(st.lists(st.integers(0, 1), min_size=T, max_size=T)), dtype=np.int8)
    if not labels.any():
        labels[draw(st.integers(0, T - 1))] = 1
    det = np.array(draw(st.lists(st.integers(0, 1), min_size=T, max_size=T)), dtype=np.int8)
    l_nm = draw(st.integers(1, max(1, T // 2)))
    return labels, det, l_nm


# acceptance criteria report one line each; printed after the run so they
# show up even when output capture is on
CRITERIA: list[str] = []


def record_criterion(number: int, ok: bool, title: str, detail: str) -> None:
    CRITERIA.append(f"{'PASS' if ok else 'FAIL'}  [{number}] {title}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda l: int(l.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
