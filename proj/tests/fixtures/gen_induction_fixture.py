"""Writes the 12-document fixture and the scripted responses that drive it.

Themes: economy (e*), healthcare (h*), environment (v*, split into climate
v1-v2 and pollution v3-v4). Iteration 0 leaves the environment clusters
barren, and "Government Criticism" comes out generic, so the loop revisits
v1-v4 and iteration 1 yields the two environment concepts.
"""
import csv
import json
import math
import sys
from pathlib import Path

FILLER = (" Several residents said they had raised the matter at town meetings, at the library, "
          "and with neighbours over the past year without hearing any clear answer back from officials.")

DOCS = [
    ("e1", "Grocery prices keep climbing and my paycheck does not stretch like it used to." + FILLER + FILLER, 1, 42.5),
    ("e2", "The factory closed last spring and half the street is still looking for work.", 2, 38.0),
    ("e3", "Rent went up again and the council did nothing to slow it down.", 1, 51.0),
    ("e4", "Small shops on Main Street are shutting because nobody can afford to spend.", 3, 29.5),
    ("h1", "The nearest clinic is an hour away and the wait for an appointment is weeks.", 2, 61.0),
    ("h2", "My insurance premium doubled while coverage for prescriptions shrank.", 1, 47.0),
    ("h3", "The hospital cut its night staff and the emergency room is always packed.", 3, 55.5),
    ("h4", "Officials promised cheaper medicine but drug costs are higher than ever.", 2, 33.0),
    ("v1", "Summers are getting hotter and the river dried up for the first time in memory.", 1, 70.0),
    ("v2", "Storms flood the lower town every year now and the levee plan keeps stalling.", 3, 44.0),
    ("v3", "Smoke from the plant hangs over the school yard most mornings." + FILLER + FILLER, 2, 36.5),
    ("v4", "The creek behind the mill turns orange after heavy rain and the fish are gone.", 1, 58.0),
]

BULLETS = {
    "e1": ["rising grocery prices strain budgets", "wages not keeping up with costs"],
    "e2": ["factory closure caused local job losses", "neighbours still searching for work"],
    "e3": ["rent increases burden local tenants", "council inaction on housing costs"],
    "e4": ["main street shops are closing", "consumers cannot afford to spend"],
    "h1": ["clinic is far from residents", "long waits for medical appointments"],
    "h2": ["insurance premiums doubled this year", "prescription coverage has been reduced"],
    "h3": ["hospital night staff were cut", "emergency room is always crowded"],
    "h4": ["officials broke promises on medicine", "drug costs keep rising"],
    "v1": ["summers are becoming hotter", "river dried up unexpectedly"],
    "v2": ["annual storms flood lower town", "levee plan keeps being delayed"],
    "v3": ["plant smoke covers the school", "children breathe polluted morning air"],
    "v4": ["creek discoloured after heavy rain", "fish vanished from polluted creek"],
}

THEME_AXIS = {"e": 0, "h": 1, "v1": 2, "v2": 2, "v3": 3, "v4": 3}


def embedding(doc_id, k):
    axis = THEME_AXIS.get(doc_id, THEME_AXIS.get(doc_id[0]))
    v = [0.0] * 8
    v[axis] = 1.0
    # Small, distinct offsets so no two bullets coincide.
    slot = int(doc_id[1]) * 2 + k
    v[4 + slot % 4] = 0.02 * (1 + slot)
    norm = math.sqrt(sum(x * x for x in v))
    return [round(x / norm, 6) for x in v]


def results(answers):
    return {"pattern_results": [{"example_id": d, "rationale": f"judged {a}", "answer": a} for d, a in answers]}


def main(out_dir):
    out = Path(out_dir)
    with open(out / "fixture12.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "text", "district", "age"])
        for d, text, district, age in DOCS:
            w.writerow([d, text, district, age])

    completions = []
    # Filter runs only on the two long documents; one fabricated quote is dropped.
    completions.append({"template": "filter", "contains": "Grocery prices keep climbing",
                        "response": {"relevant_quotes": [
                            "Grocery prices keep climbing and my paycheck does not stretch like it used to.",
                            "Prices are out of control everywhere."]}})
    completions.append({"template": "filter", "contains": "Smoke from the plant",
                        "response": {"relevant_quotes": [
                            "Smoke from the plant hangs over the school yard most mornings."]}})
    keys = {d: text[:28] for d, text, _, _ in DOCS}
    for d, bullets in BULLETS.items():
        completions.append({"template": "summarize", "contains": keys[d], "response": {"bullets": bullets}})

    def pattern(name, prompt, ids):
        return {"name": name, "prompt": prompt, "example_ids": ids}

    completions.append({"template": "synthesize", "contains": "i0-e1-1", "response": {"patterns": [
        pattern("Economic Anxiety", "Does the text express worry about prices, wages or jobs?", ["i0-e1-1", "i0-e2-1"]),
        pattern("Government Criticism", "Does the text criticize officials or public institutions?", ["i0-e3-2", "i0-h9-1"]),
    ]}})
    completions.append({"template": "synthesize", "contains": "i0-h1-1", "response": {"patterns": [
        pattern("Healthcare Access", "Does the text describe difficulty obtaining medical care?", ["i0-h1-1", "i0-h3-2"]),
    ]}})
    completions.append({"template": "synthesize", "contains": "i0-v", "response": {"patterns": []}})
    completions.append({"template": "synthesize", "contains": "i1-v1-1", "response": {"patterns": [
        pattern("Climate Worry", "Does the text describe changing weather or climate harm?", ["i1-v1-2", "i1-v2-1"]),
    ]}})
    completions.append({"template": "synthesize", "contains": "i1-v3-1", "response": {"patterns": [
        pattern("Pollution Concerns", "Does the text describe air or water pollution?", ["i1-v3-1", "i1-v4-2"]),
    ]}})

    ids = [d for d, *_ in DOCS]
    score = {
        "Economic Anxiety": {d: ("A" if d[0] == "e" else "B" if d == "h2" else "E") for d in ids},
        "Government Criticism": {d: ("A" if d in {"e1", "e3", "e4", "h1", "h2", "h3", "h4", "v2", "e2"} else "D") for d in ids},
        "Healthcare Access": {d: ("A" if d[0] == "h" else "E") for d in ids},
        "Climate Worry": {d: ("A" if d in {"v1", "v2"} else "C" if d == "v4" else "E") for d in ids},
        "Pollution Concerns": {d: ("A" if d in {"v3", "v4"} else "E") for d in ids},
    }
    for name, answers in score.items():
        completions.append({"template": "score", "contains": f"named {name} with",
                            "response": results(sorted(answers.items()))})

    embeddings = {}
    for d, bullets in BULLETS.items():
        for k, b in enumerate(bullets):
            embeddings[b] = embedding(d, k)

    script = {"completions": completions, "embeddings": embeddings}
    with open(out / "fixture12_script.json", "w") as f:
        json.dump(script, f, indent=1, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
