"""Writes fuzz corpus seeds from the parser fixtures, the shipped templates and hand-made inputs."""
import glob, hashlib, json, os

ROOT = os.path.join(os.path.dirname(__file__), "..")
CORPUS = os.path.join(ROOT, "fuzz", "corpus")

# Selector byte for the completion_parsers target.
SELECT = {
    ("label", "sst2"): 0, ("label", None): 1, ("label", "fewrel"): 1, ("label", "crossner"): 1,
    ("entity_list", None): 2, ("numbered_list", "strict"): 3, ("numbered_list", "lenient"): 4,
    ("numbered_list", None): 3, ("entity_pair", None): 5, ("entity_pairs", None): 6, ("aste", None): 7,
    ("aste_inline", None): 8, ("aste_inline_parallel", None): 9, ("sentiment_line", None): 10,
    ("text_items", None): 11, ("sentence", None): 12, ("generated_entities", None): 13,
}


def seed(target, data):
    if isinstance(data, str):
        data = data.encode()
    d = os.path.join(CORPUS, target)
    os.makedirs(d, exist_ok=True)
    with open(os.path.join(d, hashlib.sha1(data).hexdigest()[:16]), "wb") as f:
        f.write(data)


for p in sorted(glob.glob(os.path.join(ROOT, "crates/core/tests/fixtures/parsers/*.json"))):
    fx = json.load(open(p))
    v = fx["variant"]
    key = (fx["parser"], v if v in ("sst2", "fewrel", "crossner", "strict", "lenient") else None)
    if key not in SELECT:
        key = (fx["parser"], None)
    seed("completion_parsers", bytes([SELECT[key]]) + fx["input"].encode())
seed("completion_parsers", b"\x0d A person who writes software.")

seed("conll_bio", "EU\tB-ORG\nrejects\tO\nGerman\tB-MISC\ncall\tO\n\nPeter\tB-PER\nBlackburn\tI-PER\n")
seed("conll_bio", "-DOCSTART- O\n\nJapan B-LOC\nbegan O\n")
seed("conll_bio", "a\tI-PER\nb\tO\n")
seed("conll_bio", "a\tB-PER\n\n\n\nb\tX-PER\n")

seed("aste_line", "The battery life is great .####[([1, 2], [4], 'POS')]\n")
seed("aste_line", "Slow boot but nice screen .####[([0], [1], 'NEG'), ([4], [3], 'POS')]\n")
seed("aste_line", "bad line without separator\n")
seed("aste_line", "x ####[([9], [0], 'POS')]\n")
seed("aste_line", "ok .####[]\r\na\rb####[]\n")

seed("jsonl_dataset", '{"text": "a warm and witty crowd pleaser", "label": "Positive"}\n{"text": "dull", "label": "Negative"}\n')
seed("jsonl_dataset", '{"text": "Kim leads Norway .", "head": "Kim", "tail": "Norway", "relation": "head of government"}\n')
seed("jsonl_dataset", '{"text": 3}\n')
seed("jsonl_dataset", "\n\n{}\n")

seed("sparql_response", json.dumps({"head": {"vars": ["headLabel", "tailLabel"]}, "results": {"bindings": [
    {"headLabel": {"type": "literal", "value": "Norway"}, "tailLabel": {"type": "literal", "value": "Jonas Gahr"}}]}}))
seed("sparql_response", json.dumps({"results": {"bindings": [{"itemLabel": {"type": "literal", "value": "Q42"}}]}}))
seed("sparql_response", '{"results": {"bindings": [{}]}}')
seed("sparql_response", "<html>rate limited</html>")

seed("completion_response", json.dumps({"choices": [{"text": " Positive", "finish_reason": "stop"}],
                                        "usage": {"prompt_tokens": 12, "completion_tokens": 1, "total_tokens": 13}}))
seed("completion_response", '{"choices": []}')
seed("completion_response", '{"error": {"message": "overloaded"}}')

seed("mock_script", json.dumps({"rules": [{"pattern": "Sentiment:$", "response": " Positive"}]}))
seed("mock_script", json.dumps({"rules": [{"pattern": "(", "response": ""}]}))
seed("mock_script", json.dumps({"rules": [{"pattern": ".", "response": "x", "usage": {"prompt_tokens": 3, "completion_tokens": 1}}]}))

for p in sorted(glob.glob(os.path.join(ROOT, "crates/core/templates/*.json")))[:8]:
    seed("prompt_template", open(p, "rb").read())
seed("prompt_template", "Text: {text}\nSentiment:")
seed("prompt_template", "{unclosed")
seed("prompt_template", "{{literal}} {label}")

seed("run_config", json.dumps({"task": {"kind": "classification"}, "backend": {"provider": "mock", "mock_script": "mock.json"},
                               "pipeline": {}, "io": {"input": "q.jsonl", "output_dir": "run"}}))
seed("run_config", json.dumps({"task": {"kind": "relation_extraction", "labels": ["director"]},
                               "backend": {"provider": "live", "endpoint": "http://localhost:1", "parallelism": 4},
                               "pipeline": {"mode": "pgdg", "budget": {"per_label_cap": 20}, "seed": 7},
                               "io": {"output_dir": "out", "split": [0.8, 0.2]}}))
seed("run_config", '{"task": {"kind": "ner"}, "backend": {"provider": "mock", "bogus": 1}}')
