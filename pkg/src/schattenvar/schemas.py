"""JSON Schemas for the command-line reports."""

_number_or_null = {"type": ["number", "null"]}

MANIFEST = {
    "type": "object",
    "required": ["tool", "version", "subcommand", "parameters", "inputs", "seed"],
    "properties": {
        "tool": {"const": "schattenvar"},
        "version": {"type": "string"},
        "subcommand": {"enum": ["estimate", "variance", "bounds", "validate"]},
        "parameters": {"type": "object"},
        "inputs": {
            "type": "object",
            "additionalProperties": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        },
        "seed": {"type": ["integer", "null"]},
    },
}

ESTIMATE = {
    "type": "object",
    "required": ["manifest", "p", "n", "d", "target"],
    "properties": {
        "manifest": MANIFEST,
        "p": {"type": "integer"},
        "n": {"type": "integer"},
        "d": {"type": "integer"},
        "target": {"type": "number"},
        "estimate": {"type": "number"},
        "stats": {
            "type": "object",
            "required": ["empirical_mean", "empirical_variance", "stderr_mean", "stderr_variance", "reps"],
            "properties": {
                "empirical_mean": {"type": "number"},
                "empirical_variance": _number_or_null,
                "stderr_mean": _number_or_null,
                "stderr_variance": _number_or_null,
                "reps": {"type": "integer", "minimum": 1},
            },
        },
    },
}

VARIANCE = {
    "type": "object",
    "required": ["manifest", "method", "p", "n", "d", "mean", "second_moment", "variance", "per_q"],
    "properties": {
        "manifest": MANIFEST,
        "method": {"enum": ["recursion", "paper-literal", "brute", "oracle"]},
        "p": {"type": "integer"},
        "n": {"type": "integer"},
        "d": {"type": "integer"},
        "mean": {"type": "number"},
        "second_moment": {"type": "number"},
        "variance": {"type": "number"},
        "discrepancy": {"type": "number"},
        "per_q": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["q", "count", "sum"],
                "properties": {"q": {"type": "integer"}, "count": {"type": "integer"}, "sum": {"type": "number"}},
            },
        },
    },
}

_bound_row = {
    "type": "object",
    "required": ["p", "n", "d", "b1", "b2", "b3", "b4", "new_bound", "kv_bound", "kappa", "ratio"],
    "properties": {
        **{k: {"type": "integer"} for k in ("p", "n", "d")},
        **{k: _number_or_null for k in ("trace_p", "b1", "b2", "b3", "b4", "new_bound", "kv_bound",
                                         "kappa", "ratio", "exact_variance", "slack")},
    },
}

BOUNDS = {
    "type": "object",
    "required": ["manifest", "bounds"],
    "properties": {
        "manifest": MANIFEST,
        "bounds": {"type": "array", "items": _bound_row},
    },
}

VALIDATE = {
    "type": "object",
    "required": ["manifest", "passed", "checks", "errata"],
    "properties": {
        "manifest": MANIFEST,
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "status"],
                "properties": {"name": {"type": "string"}, "status": {"enum": ["pass", "fail", "skip"]}},
            },
        },
        "errata": {"type": "array", "items": {"type": "object", "required": ["id", "expected"]}},
    },
}

SCHEMAS = {"estimate": ESTIMATE, "variance": VARIANCE, "bounds": BOUNDS, "validate": VALIDATE}
