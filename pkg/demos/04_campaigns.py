"""Small versions of the verification campaigns, with their report lines.

The full-size runs live in tests/test_acceptance.py; these finish in a
few seconds and print each suite's summary record.
"""

from stabletrains.campaigns import run_campaign

plan = [
    ("leader-creation", ["ring:8", "path:8"], 5),
    ("marked-vanish", ["ring:8", "grid:3x3"], 5),
    ("train-incr", ["path:8", "gnp:8:0.4"], 5),
    ("leg-grow", ["ring:8", "path:6"], 3),
    ("convergence", ["ring:6"], 4),
]
for suite, graphs, runs in plan:
    report = run_campaign(suite, graphs, 5, runs)
    s = report.summary()
    print(f"{suite:<16} passed={s['passed']!s:<5} runs={s['runs']:<3} violations={s['violations']:<3} "
          f"events={s['events']:<4} median_rounds={s['median_rounds']}")

print("\nlast report, as written by --report:")
print("\n".join(report.lines()))
