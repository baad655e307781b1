"""Regenerates the 500-row synthetic stand-ins for the Adult, HSLS and
MNIST-CSV inputs. Column layouts follow the public files; every value is
synthetic."""
import csv
import numpy as np

rng = np.random.default_rng(20240601)
N = 500


def adult(path):
    cols = ["age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
            "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
            "hours-per-week", "native-country", "income"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for _ in range(N):
            sex = "Female" if rng.random() < 0.33 else "Male"
            edu = int(np.clip(rng.normal(10, 2.5), 1, 16))
            age = int(np.clip(rng.normal(38, 13), 17, 90))
            hours = int(np.clip(rng.normal(40 if sex == "Male" else 36, 11), 1, 99))
            score = 0.35 * (edu - 10) + 0.04 * (age - 38) + 0.05 * (hours - 40) + (0.6 if sex == "Male" else -0.6)
            rich = rng.random() < 1 / (1 + np.exp(-(score - 1.0)))
            gain = int(rng.exponential(8000)) if rng.random() < (0.15 if rich else 0.04) else 0
            loss = int(rng.normal(1900, 300)) if rng.random() < 0.05 else 0
            w.writerow([age, rng.choice(["Private", "Self-emp-not-inc", "Local-gov", "?"]),
                        int(rng.lognormal(12.0, 0.5)), "HS-grad", edu,
                        rng.choice(["Married-civ-spouse", "Never-married", "Divorced"]),
                        rng.choice(["Exec-managerial", "Craft-repair", "Sales", "?"]),
                        rng.choice(["Husband", "Not-in-family", "Own-child", "Wife"]),
                        rng.choice(["White", "Black", "Asian-Pac-Islander"]), sex, gain, loss, hours,
                        "United-States", ">50K" if rich else "<=50K"])


def hsls(path):
    cols = ["STU_ID", "X1SEX", "X1RACE", "X1MTHID", "X1MTHUTI", "X1MTHEFF", "X1FAMINCOME",
            "X1SCHOOLBEL", "X1TXMSCR"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for i in range(N):
            race = int(rng.choice([1, 2, 3, 4, 5, 6, 7, 8], p=[.02, .08, .13, .06, .12, .09, .01, .49]))
            urm = race not in (2, 8)
            mid, uti, eff, bel = rng.normal(0, 1, 4)
            inc = int(np.clip(rng.normal(5.5 if not urm else 4.0, 2.5), 1, 13))
            score = 50 + 4 * mid + 2 * eff + 1.2 * inc - (3 if urm else 0) + rng.normal(0, 7)
            row = [10000 + i, int(rng.integers(1, 3)), race, f"{mid:.2f}", f"{uti:.2f}", f"{eff:.2f}",
                   inc, f"{bel:.2f}", f"{score:.4f}"]
            if rng.random() < 0.03:
                row[3 + int(rng.integers(0, 5))] = "NA"
            w.writerow(row)


def mnist(path):
    templates = rng.uniform(0, 1, (10, 28, 28)) ** 3
    yy, xx = np.mgrid[0:28, 0:28]
    mask = ((yy - 13.5) ** 2 + (xx - 13.5) ** 2) < 11 ** 2
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label"] + [f"pixel{i}" for i in range(784)])
        digits = np.concatenate([np.repeat([0, 2, 3, 7], 100), rng.integers(0, 10, N - 400)])
        rng.shuffle(digits)
        for d in digits:
            img = 255 * templates[d] * mask * rng.uniform(0.6, 1.0) + rng.normal(0, 20, (28, 28)) * mask
            w.writerow([int(d)] + [int(v) for v in np.clip(img, 0, 255).ravel()])


if __name__ == "__main__":
    adult("adult_sample.csv")
    hsls("hsls_sample.csv")
    mnist("mnist_sample.csv")
