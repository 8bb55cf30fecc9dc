"""Collector for the one-line acceptance verdicts printed at the end of a run."""

LINES = []


def report(number, passed, detail):
    line = f"CRITERION {number} {'PASS' if passed else 'FAIL'}: {detail}"
    LINES.append(line)
    print(line)
    return passed
