"""Writes the parser fixture corpus. Expected values are known by construction."""
import json, os, random, sys

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures", "parsers")
rng = random.Random(20230512)
fixtures = []

def add(name, parser, inp, expected, variant=None):
    fixtures.append({"name": name, "parser": parser, "variant": variant, "input": inp, "expected": expected})

ok = lambda v: {"ok": v}
err = lambda r: {"err": r}

SST2 = ["Positive", "Negative"]
FEWREL = ["place served by transport hub", "mountain range", "religion", "participating team",
          "contains administrative territorial entity", "head of government", "country of citizenship",
          "original network", "heritage designation", "performer", "participant of", "position held", "has part",
          "location of formation", "located on terrain feature", "architect", "country of origin", "publisher",
          "director", "father", "developer", "military branch", "mouth of the watercourse", "nominated for",
          "movement", "successful candidate", "followed by", "manufacturer", "instance of", "after a work by",
          "member of political party", "licensed to broadcast to", "headquarters location", "sibling", "instrument",
          "country", "occupation", "residence", "work location", "subsidiary", "participant", "operator",
          "characters", "occupant", "genre", "operating system", "owned by", "platform", "tributary", "winner",
          "said to be the same as", "composer", "league", "record label", "distributor", "screenwriter",
          "sports season of league or competition", "taxon rank", "location", "field of work",
          "language of work or name", "applies to jurisdiction", "notable work",
          "located in the administrative territorial entity"]
CROSSNER = ["product", "field", "task", "researcher", "university", "programming language", "algorithm", "misc",
            "metrics", "organisation", "conference", "country", "location", "person"]
WORDS = ["battery", "screen", "keyboard", "price", "speed", "fan", "case", "port", "display", "driver", "touchpad",
         "sound", "weight", "charger", "hinge", "good", "slow", "loud", "cheap", "bright", "heavy", "great", "poor",
         "fast", "sturdy", "dim", "quiet", "nice", "awful", "solid"]
NAMES = ["Marvin Minsky", "Seymour Papert", "David Silver", "Fei-Fei Li", "Claude Shannon", "Ruslan Salakhutdinov",
         "MIT", "Stanford University", "Python", "LISP", "ImageNet", "Geoffrey Hinton", "Yann LeCun", "DeepMind",
         "backpropagation", "Élisabeth Borne", "São Paulo", "Łódź University"]
SENTS = ["positive", "negative", "neutral"]

# ---- prompt-sample and rule examples (hand-checked) ----
add("sample-label-sst2", "label", " Positive\n", ok("Positive"), "sst2")
add("rule-label-normalize", "label", "positive.", ok("Positive"), "sst2")
add("rule-label-nomatch", "label", "mostly good", err("NoMatch"), "sst2")
add("rule-label-empty", "label", "", err("Empty"), "sst2")
add("rule-label-relation", "label", " mountain range", ok("mountain range"), "fewrel")
add("rule-label-govt", "label", "head of govt", err("NoMatch"), "fewrel")
add("rule-label-synonym", "label", "birthplace", err("NoMatch"), "fewrel")
add("sample-label-disambiguation", "label", " researcher", ok("researcher"), "crossner")
add("sample-entity-list", "entity_list", "Marvin Minsky; Seymour Papert;", ok(["Marvin Minsky", "Seymour Papert"]))
add("rule-entity-list-empty", "entity_list", "", ok([]))
add("rule-entity-list-dedup", "entity_list", "MIT; MIT; mit", ok(["MIT", "mit"]))
add("sample-numbered", "numbered_list", "1. David Silver\n2. Fei-Fei Li", ok(["David Silver", "Fei-Fei Li"]), "strict")
add("rule-numbered-unindexed", "numbered_list", "David Silver", ok([]), "strict")
add("rule-numbered-noise", "numbered_list", "1. A\nnoise\n2) B", ok(["A", "B"]), "strict")
add("rule-pair", "entity_pair", "Head Entity: France; Tail Entity: Élisabeth Borne", ok(["France", "Élisabeth Borne"]))
add("rule-pair-missing-head", "entity_pair", "Head Entity: ; Tail Entity: X", err("MissingHead"))
add("sample-pair", "entity_pair", "Head Entity: United States; Tail Entity: Chester Alan Arthur",
    ok(["United States", "Chester Alan Arthur"]))
add("sample-aste-v1", "aste", "Target0: instructions; Opinion0: problem; Sentiment0: negative",
    ok([["instructions", "problem", "negative"]]), "1")
add("sample-aste-v1-two", "aste",
    "Target0: instructions; Opinion0: problem; Sentiment0: negative\nTarget1: instructions; Opinion1: no; Sentiment1: negative",
    ok([["instructions", "problem", "negative"], ["instructions", "no", "negative"]]), "1")
add("sample-aste-v2", "aste", "Target:instructions; instructions;\nOpinion: problem; no;\nSentiment: negative; negative;",
    ok([["instructions", "problem", "negative"], ["instructions", "no", "negative"]]), "2")
add("rule-aste-v2-mismatch", "aste", "Target: instructions; instructions;\nOpinion: problem;\nSentiment: negative; negative;",
    err("LengthMismatch"), "2")
add("sample-aste-v3", "aste", "Target0: is instructions. Its opinion span is no. Its sentiment is negative.",
    ok([["instructions", "no", "negative"]]), "3")
add("sample-aste-v3-two", "aste",
    "Target0: is instructions. Its opinion span is problem. Its sentiment is negative.\nTarget1: is instructions. Its opinion span is no. Its sentiment is negative.",
    ok([["instructions", "problem", "negative"], ["instructions", "no", "negative"]]), "3")
add("sample-aste-inline", "aste_inline",
    "Target0: instructions; Opinion0: problem; Sentiment0: negative; Target1: instructions; Opinion1: no; Sentiment1: negative;",
    ok([["instructions", "problem", "negative"], ["instructions", "no", "negative"]]))
add("sample-aste-inline-parallel", "aste_inline_parallel",
    "Target:  instructions; instructions; Opinion: problem; no; Sentiment: negative; negative;",
    ok([["instructions", "problem", "negative"], ["instructions", "no", "negative"]]))
add("sample-sentiment-line-1", "sentiment_line", "Sentiment: positive; Target: features; Opinion: nice;",
    ok(["features", "nice", "positive"]))
add("sample-sentiment-line-2", "sentiment_line", "Sentiment: positive; Target: priced; Opinion: reasonable;",
    ok(["priced", "reasonable", "positive"]))
add("sample-generated-entities", "generated_entities",
    " David Silver, Fei-Fei Li, Claude Shannon, Marvin Minsky, Ruslan Salakhutdinov",
    ok(["David Silver", "Fei-Fei Li", "Claude Shannon", "Marvin Minsky", "Ruslan Salakhutdinov"]))
add("sample-generated-entities-numbered", "generated_entities", "\n1. David Silver\n2. Fei-Fei Li\n",
    ok(["David Silver", "Fei-Fei Li"]))
add("sample-sentence-fewrel", "sentence",
    " Chester Alan Arthur , 21st President of the United States , died of this disease , November 18 , 1886\n",
    ok("Chester Alan Arthur , 21st President of the United States , died of this disease , November 18 , 1886"))
add("sample-text-items", "text_items", "Text: a feast for the eyes\nSentiment: Positive\nText: a real crowd-pleaser",
    ok(["a feast for the eyes", "a real crowd-pleaser"]))

# ---- labels ----
def decorate_label(lab):
    case = rng.choice([lambda s: s, str.lower, str.upper, str.title])
    pre = rng.choice(["", " ", "\n", "  \n "])
    echo = rng.choice(["", "", "Sentiment: ", "Relation: ", "relation:", "Label: ", "Entity Type: "])
    post = rng.choice(["", ".", "\n", "\nText: next one", "!", " .", ";"])
    return pre + echo + case(lab) + post

spaces = {"sst2": SST2, "fewrel": FEWREL, "crossner": CROSSNER}
for i in range(26):
    sp = rng.choice(list(spaces))
    lab = rng.choice(spaces[sp])
    add(f"label-ok-{i:02}", "label", decorate_label(lab), ok(lab), sp)
bad = ["maybe", "head of govt", "birth place", "Sentiment: mixed", "resercher", "place served", "neutral",
       "head  of government", "Relation: none", "the answer is Positive"]
for i, b in enumerate(bad):
    sp = "sst2" if i in (0, 3, 6, 9) else ("crossner" if i == 4 else "fewrel")
    add(f"label-nomatch-{i:02}", "label", b, err("NoMatch"), sp)
for i, b in enumerate(["   ", "\n\n", "Sentiment:", "Relation: .", "..."]):
    add(f"label-empty-{i:02}", "label", b, err("Empty"), "sst2")

# ---- entity lists ----
for i in range(16):
    items = rng.sample(NAMES, rng.randint(0, 5))
    dup = items and rng.random() < 0.4
    shown = items + ([rng.choice(items)] if dup else [])
    if rng.random() < 0.3:
        shown.insert(rng.randint(0, len(shown)), rng.choice(["None", "N/A", "none"]))
    sep = rng.choice(["; ", ";", " ; "])
    text = sep.join(shown) + rng.choice(["", ";", "; ", "\nText: more"])
    if not shown:
        text = rng.choice(["None", " None;", "", "N/A"])
    add(f"entity-list-{i:02}", "entity_list", " " + text, ok(items))

# ---- numbered lists ----
for i in range(12):
    items = rng.sample(NAMES, rng.randint(1, 5))
    lines = []
    for k, it in enumerate(items):
        lines.append(f"{k + 1}{rng.choice(['.', ')', ' .'])}{rng.choice([' ', '  ', ''])}{it}")
        if rng.random() < 0.3:
            lines.append(rng.choice(["", "noise line", "Researcher:"]))
    mode = "strict" if i % 2 == 0 else "lenient"
    exp = items if mode == "strict" else None
    if mode == "lenient":
        exp = []
        for l in lines:
            s = l.strip()
            if not s:
                continue
            j = 0
            while j < len(s) and s[j].isdigit():
                j += 1
            rest = s[j:].lstrip()
            if j > 0 and rest[:1] in (".", ")"):
                s = rest[1:].strip()
            if s:
                exp.append(s)
    add(f"numbered-{i:02}", "numbered_list", "\n".join(lines), ok(exp), mode)

# ---- entity pairs ----
for i in range(12):
    h, t = rng.sample(NAMES, 2)
    line = f"{rng.choice(['', '1. ', '- '])}Head Entity: {h}{rng.choice([';', ' ;', '; '])} Tail Entity: {t}{rng.choice(['', ';', ' '])}"
    add(f"pair-{i:02}", "entity_pair", line, ok([h, t]))
for i, (text, r) in enumerate([("Tail Entity: X", "MissingHead"), ("Head Entity: X", "MissingTail"),
                               ("Head Entity: X; Tail Entity: ", "MissingTail"), ("", "MissingHead"),
                               ("head entity:X;tail entity:Y", None)]):
    add(f"pair-bad-{i:02}", "entity_pair", text, ok(["X", "Y"]) if r is None else err(r))
for i in range(8):
    pairs, lines, rejected = [], [], 0
    for k in range(rng.randint(1, 6)):
        h, t = rng.sample(NAMES, 2)
        if rng.random() < 0.2:
            lines.append(f"Head Entity: {h};")
            rejected += 1
        else:
            lines.append(f"Head Entity: {h}; Tail Entity: {t}")
            pairs.append([h, t])
        if rng.random() < 0.3:
            lines.append("Relation: head of government")
    add(f"pairs-{i:02}", "entity_pairs", "\n".join(lines), ok({"pairs": pairs, "rejected": rejected}))

# ---- ASTE ----
def rand_surface():
    return " ".join(rng.sample(WORDS, rng.randint(1, 3)))

def rand_triplets(n):
    return [[rand_surface(), rand_surface(), rng.choice(SENTS)] for _ in range(n)]

def fmt_v1(ts):
    return "\n".join(f"Target{i}: {t}; Opinion{i}: {o}; Sentiment{i}: {s}" for i, (t, o, s) in enumerate(ts))

def fmt_v2(ts):
    return "\n".join([
        "Target: " + "".join(f"{t}; " for t, _, _ in ts).rstrip(),
        "Opinion: " + "".join(f"{o}; " for _, o, _ in ts).rstrip(),
        "Sentiment: " + "".join(f"{s}; " for _, _, s in ts).rstrip()])

def fmt_v3(ts):
    return "\n".join(f"Target{i}: is {t}. Its opinion span is {o}. Its sentiment is {s}." for i, (t, o, s) in enumerate(ts))

fmts = {"1": fmt_v1, "2": fmt_v2, "3": fmt_v3}
for v in "123":
    for i in range(9):
        ts = rand_triplets(rng.randint(1, 4))
        text = fmts[v](ts) + rng.choice(["", "\nText: following sentence", "\n\n"])
        add(f"aste-v{v}-{i:02}", "aste", text, ok(ts), v)
    add(f"aste-v{v}-none", "aste", {"1": "Target0: None", "2": "Target: None;", "3": "Target0: None"}[v], ok([]), v)
    add(f"aste-v{v}-empty", "aste", "  ", err("Empty"), v)
    ts = rand_triplets(2)
    ts[1][2] = "great"
    add(f"aste-v{v}-badsent", "aste", fmts[v](ts), err("BadSentiment"), v)
    add(f"aste-v{v}-grammar", "aste", "The targets are unclear.", err("Grammar"), v)
add("aste-v1-index-mismatch", "aste", "Target0: a; Opinion1: b; Sentiment0: positive", err("Grammar"), "1")
add("aste-v1-missing-field", "aste", "Target0: a; Opinion0: b", err("Grammar"), "1")
add("aste-v2-missing-line", "aste", "Target: a;\nOpinion: b;", err("Grammar"), "2")
add("aste-v3-missing-is", "aste", "Target0: a. Its opinion span is b. Its sentiment is positive.", err("Grammar"), "3")

for i in range(6):
    ts = rand_triplets(rng.randint(1, 3))
    add(f"aste-inline-{i:02}", "aste_inline",
        " ".join(f"Target{k}: {t}; Opinion{k}: {o}; Sentiment{k}: {s};" for k, (t, o, s) in enumerate(ts)), ok(ts))
    add(f"aste-inline-parallel-{i:02}", "aste_inline_parallel",
        "Target: " + " ".join(f"{t};" for t, _, _ in ts) + " Opinion: " + " ".join(f"{o};" for _, o, _ in ts)
        + " Sentiment: " + " ".join(f"{s};" for _, _, s in ts), ok(ts))
    t, o, s = rand_triplets(1)[0]
    add(f"sentiment-line-{i:02}", "sentiment_line", f"Sentiment: {s}; Target: {t}; Opinion: {o};", ok([t, o, s]))
add("aste-inline-parallel-mismatch", "aste_inline_parallel", "Target: a; b; Opinion: c; Sentiment: positive; positive;",
    err("LengthMismatch"))
add("sentiment-line-bad", "sentiment_line", "Sentiment: happy; Target: a; Opinion: b;", err("BadSentiment"))
add("sentiment-line-order", "sentiment_line", "Target: a; Sentiment: positive; Opinion: b;", err("Grammar"))

# ---- texts ----
REVIEWS = ["a feast for the eyes", "boring and obvious", "a real crowd-pleaser", "an utter waste of time",
           "A heartfelt and sincere film that will leave you feeling uplifted"]
for i in range(4):
    rs = rng.sample(REVIEWS, rng.randint(1, 4))
    lines = []
    for r in rs:
        lines.append(rng.choice([f"Text: {r}", f"{len(lines) + 1}. {r}", f'Text: "{r}"']))
        if rng.random() < 0.5:
            lines.append("Sentiment: Positive")
    add(f"text-items-{i:02}", "text_items", "\n".join(lines), ok(rs))
for i, (inp, exp) in enumerate([("  a fine film .\nSentiment: Positive", ok("a fine film .")),
                                 ("\n\nText: It serves Manila .", ok("It serves Manila .")),
                                 ('"Quoted sentence."', ok("Quoted sentence.")), (" \n ", err("Empty"))]):
    add(f"sentence-{i:02}", "sentence", inp, exp)
for i in range(3):
    items = rng.sample(NAMES, rng.randint(1, 5))
    add(f"generated-entities-{i:02}", "generated_entities", " " + rng.choice([", ", "; "]).join(items), ok(items))

assert len(fixtures) == 200, len(fixtures)
names = [f["name"] for f in fixtures]
assert len(set(names)) == len(names)
os.makedirs(OUT, exist_ok=True)
for f in os.listdir(OUT):
    if f.endswith(".json"):
        os.remove(os.path.join(OUT, f))
for i, f in enumerate(fixtures):
    with open(os.path.join(OUT, f"{i:03}-{f['name']}.json"), "w", encoding="utf-8") as fh:
        json.dump(f, fh, ensure_ascii=False, indent=1)
        fh.write("\n")
print(len(fixtures))
