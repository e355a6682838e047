"""
Run time against dataset size
=============================

Each SQuaD-MDS iteration touches every point once, through its quartet,
so a fixed number of iterations costs time linear in n. SMACOF's Guttman
transform visits every pair, so its cost grows with n^2. A log-log fit
of the timings shows the two slopes.
"""

from squadmds.bench import run_bench

squad = run_bench([1000, 2000, 4000, 8000], method="squad-mds")
for n, seconds in squad.rows():
    print(f"squad-mds n={n:6d} {seconds:6.2f} s")
print(f"squad-mds log-log slope {squad.slope:.2f}")

smacof = run_bench([500, 1000, 2000], method="smacof")
for n, seconds in smacof.rows():
    print(f"smacof    n={n:6d} {seconds:6.2f} s")
print(f"smacof    log-log slope {smacof.slope:.2f}")
