"""Exhaustive checks of the bit-path combinatorics and a Pauli witness."""

from thirring_qca.path_lab import find_pauli_violations, run_all

for report in run_all(T_max=6):
    flag = "ok" if report.passed else "VIOLATED"
    print(f"{report.lemma_id:32s} {report.universe_size:>9d} cases  {flag}")

print("\nTwo particles never share a mode:", find_pauli_violations(2, 6) == [])
w = find_pauli_violations(3, 4, first_only=True)[0]
print("Three particles can:", w.as_dict())
