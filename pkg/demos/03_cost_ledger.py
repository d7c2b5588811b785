"""Inspect the phase ledger for each method on four simulated workers."""

from pca_costlab import MethodSpec, gen_synthetic, run_phased

A = gen_synthetic(1000, 10, rank=2, noise_sigma=0.5, seed=0)
P = 4

for spec in [MethodSpec("coveig", 2), MethodSpec("svd", 2), MethodSpec("ssvd", 2, p=3, j=1),
             MethodSpec("ppca", 2, max_iter=3, mode="standard"),
             MethodSpec("ppca", 2, max_iter=3, mode="recompute")]:
    result, report = run_phased(spec, A, P)
    label = spec.tag.value + ("" if spec.tag.value != "ppca" else "/" + spec.mode.value)
    print(f"== {label}: {report.total_flops} flops, "
          f"{report.total_intermediate_elements} elements "
          f"({report.total_intermediate_bytes} bytes)")
    for ph in report.phases:
        print(f"   {ph.name:14s} flops/worker {ph.local_flops}  "
              f"emitted {ph.emitted_elements}  broadcast {ph.broadcast_elements}")

# the same ledger as CSV, ready for a spreadsheet
_, report = run_phased(MethodSpec("coveig", 2), A, P)
print(report.to_csv(fanout=True))
