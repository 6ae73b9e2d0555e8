//! Matplotlib scripts for the emitted tables.

const COLLAPSE: &str = r#"import csv, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "..", "collapse.csv"))))
fig, ax = plt.subplots()
sc = ax.scatter([float(r["z2_over_t"]) for r in rows], [float(r["ln_p_sqrt_t"]) for r in rows],
                c=[float(r["t"]) for r in rows], s=2)
fig.colorbar(sc, label="t")
ax.set_xlabel("z^2 / t")
ax.set_ylabel("ln(P sqrt(t))")
fig.savefig(os.path.join(here, "collapse.png"), dpi=150)
"#;

const KERNEL: &str = r#"import csv, os
from collections import defaultdict
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
series = defaultdict(list)
for r in csv.DictReader(open(os.path.join(here, "..", "kernel.csv"))):
    series[float(r["t"])].append((float(r["x"]), float(r["value"])))
fig, ax = plt.subplots()
for t, pts in sorted(series.items()):
    ax.plot([p[0] for p in pts], [p[1] for p in pts], lw=0.8, label=f"t={t:g}")
ax.set_xlabel("x")
ax.set_ylabel("P(t, x, y)")
ax.legend(fontsize=6)
fig.savefig(os.path.join(here, "kernel.png"), dpi=150)
"#;

const CORRECTOR: &str = r#"import csv, os
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "..", "corrector.csv"))))
x = [float(r["x"]) for r in rows]
fig, (a, b) = plt.subplots(2, 1, sharex=True)
a.plot(x, [float(r["chi"]) for r in rows], lw=0.8)
a.set_ylabel("T(x) - x")
b.plot(x, [float(r["Tprime"]) for r in rows], lw=0.8)
b.set_ylabel("T'(x)")
b.set_xlabel("x")
fig.savefig(os.path.join(here, "corrector.png"), dpi=150)
"#;

/// Scripts for whichever of the known tables were produced.
pub fn scripts(files: &[String]) -> Vec<(String, String)> {
    [
        ("collapse.csv", "plots/collapse.py", COLLAPSE),
        ("kernel.csv", "plots/kernel.py", KERNEL),
        ("corrector.csv", "plots/corrector.py", CORRECTOR),
    ]
    .iter()
    .filter(|(data, _, _)| files.iter().any(|f| f == data))
    .map(|(_, name, body)| (name.to_string(), body.to_string()))
    .collect()
}
