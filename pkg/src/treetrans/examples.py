"""Built-in example machines, written in the definition format."""

from __future__ import annotations

from functools import lru_cache

from .sst import doubling_sst, identity_sst, remark_example, reverse_sst, swap_sst
from .syntax import parse_definition

ABC = "input {a:2, b:1, c:0}\n"

CONTAINS_B = """lookahead {
  states r+ r-;
  delta c -> r-;
  delta b(r+) -> r+; delta b(r-) -> r+;
  delta a(r+,r+) -> r+; delta a(r+,r-) -> r+; delta a(r-,r+) -> r+; delta a(r-,r-) -> r-;
}
"""

UNARY_CONTAINS_B = """lookahead {
  states r+ r-;
  delta ε -> r-;
  delta a(r+) -> r+; delta a(r-) -> r-;
  delta b(r+) -> r+; delta b(r-) -> r+;
}
"""

SOURCES = {
    # f(a(t,u)) = a(f(u), f(t)); f(t) = t otherwise
    "conditional-swap": ABC + """output {a:2, b:1, c:0}
states {q0, q1}
initial q0
rules {
  q0<a(t,u)> -> a(q0<u>, q0<t>);
  q1<a(t,u)> -> a(q1<t>, q1<u>);
  q0<b(t)> -> b(q1<t>);
  q1<b(t)> -> b(q1<t>);
  q0<c> -> c;
  q1<c> -> c;
}
""",
    # b(t) with no b inside t becomes a(t,t)
    "b-replacement": ABC + """output {a:2, b:1, c:0}
states {q}
initial q
""" + CONTAINS_B + """rules {
  q<a(t,u)> -> a(q<t>, q<u>);
  q<b(t|r+)> -> b(q<t>);
  q<b(t|r-)> -> a(q<t>, q<t>);
  q<c> -> c;
}
""",
    "postfix": ABC + """output string {a, b, c}
states {q}
initial q
rules {
  q<a(t,u)> -> q<t> . q<u> . 'a';
  q<b(t)> -> q<t> . 'b';
  q<c> -> 'c';
}
""",
    # S^n(0) -> a(b^n(c), a(b^(n-1)(c), ... a(b(c), c)))
    "quadratic": """input {S:1, 0:0}
output {a:2, b:1, c:0}
states {q0, q1}
initial q0
rules {
  q0<S(t)> -> a(q1<t>, q0<t>);
  q0<0> -> c;
  q1<S(t)> -> b(q1<t>);
  q1<0> -> b(c);
}
""",
    "unary-reverse": """input {a:1, b:1, c:1, ε:0}
output string {a, b, c}
states {q}
initial q
rules {
  q<a(t)> -> q<t> . 'a';
  q<b(t)> -> q<t> . 'b';
  q<c(t)> -> q<t> . 'c';
  q<ε> -> '';
}
""",
    "unary-identity": """input {a:1, b:1, ε:0}
output string {a, b}
states {q}
initial q
rules {
  q<a(t)> -> 'a' . q<t>;
  q<b(t)> -> 'b' . q<t>;
  q<ε> -> '';
}
""",
    # copies the suffix after the last b, marking a's by whether a b follows
    "unary-lookahead": """input {a:1, b:1, ε:0}
output string {a, b}
states {q, p}
initial q
""" + UNARY_CONTAINS_B + """rules {
  q<a(t|r+)> -> 'a' . q<t>;
  q<a(t|r-)> -> p<t> . 'b' . p<t>;
  q<b(t)> -> 'b' . q<t>;
  q<ε> -> '';
  p<a(t)> -> 'a' . p<t>;
  p<ε> -> 'a';
}
""",
    # undefined on inputs where a b is followed only by b's up to the end
    "unary-partial": """input {a:1, b:1, ε:0}
output string {a, b}
states {q, p}
initial q
rules {
  q<a(t)> -> q<t> . 'a';
  q<b(t)> -> p<t>;
  q<ε> -> '';
  p<a(t)> -> 'b' . q<t>;
  p<b(t)> -> p<t> . p<t>;
}
""",
    "reverse-mtt": """type mtt
input {a:1, b:1, c:1, ε:0}
output {a:1, b:1, c:1, ε:0}
states {q0:0, q:1}
initial q0
rules {
  q0<a(t)> -> q<t>(a(ε));
  q0<b(t)> -> q<t>(b(ε));
  q0<c(t)> -> q<t>(c(ε));
  q0<ε> -> ε;
  q<a(t)>(x1) -> q<t>(a(x1));
  q<b(t)>(x1) -> q<t>(b(x1));
  q<c(t)>(x1) -> q<t>(c(x1));
  q<ε>(x1) -> x1;
}
""",
    "identity-mtt": ABC + """output {a:2, b:1, c:0}
states {q:0}
initial q
rules {
  q<a(t,u)> -> a(q<t>, q<u>);
  q<b(t)> -> b(q<t>);
  q<c> -> c;
}
""",
    "copying-mtt": ABC + """output {a:2, b:1, c:0}
states {q0:0, q1:1}
initial q0
rules {
  q0<a(t,u)> -> q1<t>(b(q0<u>));
  q0<b(t)> -> b(q0<t>);
  q0<c> -> c;
  q1<a(t,u)>(x1) -> q1<u>(q1<u>(x1));
  q1<b(t)>(x1) -> b(q1<t>(x1));
  q1<c>(x1) -> a(x1, x1);
}
""",
    "b-replacement-mtt": ABC + """output {a:2, b:1, c:0}
states {q:0}
initial q
""" + CONTAINS_B + """rules {
  q<a(t,u)> -> a(q<t>, q<u>);
  q<b(t|r+)> -> b(q<t>);
  q<b(t|r-)> -> a(q<t>, q<t>);
  q<c> -> c;
}
""",
    # k discards its argument at c, so the undefined call u<t> is harmless there
    "discard-mtt": ABC + """output {a:2, b:1, c:0}
states {q0:0, k:1, u:0}
initial q0
rules {
  q0<b(t)> -> k<t>(u<t>);
  q0<c> -> c;
  q0<a(t,s)> -> a(q0<t>, q0<s>);
  k<c>(x1) -> c;
  k<b(t)>(x1) -> b(x1);
  k<a(t,s)>(x1) -> a(k<t>(x1), q0<s>);
}
""",
    "unary-mtt": """input {a:1, b:1, ε:0}
output {a:1, b:1, ε:0}
states {q0:0, p:2, g:1}
initial q0
""" + UNARY_CONTAINS_B + """rules {
  q0<a(t)> -> p<t>(a(ε), b(ε));
  q0<b(t)> -> g<t>(b(ε));
  q0<ε> -> ε;
  p<a(t|r+)>(x1,x2) -> a(p<t>(x2, x1));
  p<a(t|r-)>(x1,x2) -> p<t>(b(x1), x2);
  p<b(t)>(x1,x2) -> g<t>(x2);
  p<ε>(x1,x2) -> x1;
  g<a(t)>(x1) -> a(g<t>(x1));
  g<b(t|r-)>(x1) -> b(ε);
  g<ε>(x1) -> x1;
}
""",
}

TREE_TDTTS = ("conditional-swap", "b-replacement", "quadratic")
STRING_TDTTS = ("postfix", "unary-reverse", "unary-identity", "unary-lookahead", "unary-partial")
UNARY_TDTTS = ("unary-reverse", "unary-identity", "unary-lookahead", "unary-partial")
TDTTS = TREE_TDTTS + STRING_TDTTS
MTTS = ("reverse-mtt", "identity-mtt", "copying-mtt", "b-replacement-mtt", "discard-mtt", "unary-mtt")
UNARY_MTTS = ("reverse-mtt", "unary-mtt")
LOOKAHEAD_TDTTS = ("b-replacement", "unary-lookahead")
LOOKAHEAD_MTTS = ("b-replacement-mtt", "unary-mtt")

SSTS = {
    "remark": remark_example,
    "doubling": doubling_sst,
    "reverse-sst": reverse_sst,
    "identity-sst": identity_sst,
    "swap": swap_sst,
}


@lru_cache(maxsize=None)
def builtin(name: str):
    """A built-in transducer or SST by name."""
    if name in SOURCES:
        return parse_definition(SOURCES[name])
    if name in SSTS:
        return SSTS[name]()
    raise KeyError(f"no built-in named {name!r}; known: {', '.join(names())}")


def names() -> list[str]:
    return list(SOURCES) + list(SSTS)
