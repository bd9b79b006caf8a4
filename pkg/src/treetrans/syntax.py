"""Text format for transducer definitions.

A top-down or macro transducer is a sequence of sections::

    input {a:2, b:1, c:0}
    output {a:2, b:1, c:0}          # or: output string {a, b, c}
    states {q0, q1}                 # macro: states {q0:0, q1:1}
    initial q0
    lookahead { states r+ r-; delta c -> r-; delta b(r-) -> r+; ... }
    rules {
      q0<a(t1,t2)> -> a(q0<t2>, q0<t1>);
      q<b(t1|r+)> -> b(q<t1>);
      q1<a(t1,t2)>(x1) -> q1<t2>(q1<t2>(x1));
      p<c> -> 'c' . 'b';
    }

Streaming string transducers and register machines are wrapped in
``sst { ... }`` and ``machine { ... }`` blocks.  ``#`` after whitespace
starts a comment.
"""

from __future__ import annotations

import re

from .bta import Dbta
from .rules import UNDEFINED, Call, Out, Rule
from .terms import Param, RankedAlphabet, TermSyntaxError

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<str>'[^']*'|"[^"]*")
  | (?P<punct>[{}()<>,;:|.=@])
  | (?P<name>(?:[^\s(){}<>,;:|.=@'"\-]|-(?!>))+)
    """,
    re.VERBOSE,
)

_PARAM = re.compile(r"x([0-9]+)\Z")


class Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos

    def __repr__(self):
        return f"{self.kind}:{self.text}"


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos] == "#" and (pos == 0 or text[pos - 1].isspace()):
            nl = text.find("\n", pos)
            pos = len(text) if nl < 0 else nl
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset=1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        line = self.text.count("\n", 0, tok.pos) + 1
        raise TermSyntaxError(f"{message} (line {line}, near {tok.text or 'end of input'!r})", self.text, tok.pos)

    def at(self, text) -> bool:
        return self.tok.kind != "str" and self.tok.text == text

    def accept(self, text) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def name(self) -> str:
        if self.tok.kind != "name":
            self.error("expected a name")
        t = self.tok.text
        self.i += 1
        return t

    def integer(self) -> int:
        t = self.name()
        if not t.isdigit():
            self.error(f"expected a number, got {t!r}", self.tokens[self.i - 1])
        return int(t)

    def name_list(self) -> list[str]:
        """``{a, b, c}``."""
        self.expect("{")
        out = []
        if not self.accept("}"):
            out.append(self.name())
            while self.accept(","):
                out.append(self.name())
            self.expect("}")
        return out

    def ranked_list(self) -> list[tuple[str, int]]:
        """``{a:2, b:1}``."""
        self.expect("{")
        out = []
        if not self.accept("}"):
            while True:
                n = self.name()
                self.expect(":")
                out.append((n, self.integer()))
                if not self.accept(","):
                    break
            self.expect("}")
        return out

    def end_item(self):
        self.accept(";")

    # -- lookahead
    def lookahead(self, alphabet: RankedAlphabet) -> Dbta:
        self.expect("{")
        states: list[str] = []
        delta = {}
        while not self.accept("}"):
            kw = self.name()
            if kw == "states":
                if self.at("{"):
                    states.extend(self.name_list())
                else:
                    while self.tok.kind == "name":
                        states.append(self.name())
            elif kw == "delta":
                letter = self.name()
                vec = []
                if self.accept("("):
                    vec.append(self.name())
                    while self.accept(","):
                        vec.append(self.name())
                    self.expect(")")
                self.expect("->")
                key = (letter, tuple(vec))
                if key in delta:
                    self.error(f"duplicate lookahead transition for {letter}({','.join(vec)})")
                delta[key] = self.name()
            else:
                self.error(f"unknown lookahead item {kw!r}", self.tokens[self.i - 1])
            self.end_item()
        try:
            return Dbta(alphabet, tuple(states), delta)
        except ValueError as e:
            raise TermSyntaxError(f"bad lookahead automaton: {e}") from None

    # -- rules
    def lhs(self):
        state = self.name()
        self.expect("<")
        letter = self.name()
        variables, pattern = [], []
        if self.accept("("):
            while True:
                variables.append(self.name())
                if self.accept("|"):
                    la = self.name()
                    pattern.append(None if la == "_" else la)
                else:
                    pattern.append(None)
                if not self.accept(","):
                    break
            self.expect(")")
        self.expect(">")
        params = []
        if self.accept("("):
            if not self.at(")"):
                params.append(self.name())
                while self.accept(","):
                    params.append(self.name())
            self.expect(")")
        for j, p in enumerate(params, 1):
            if p != f"x{j}":
                self.error(f"parameters must be named x1, x2, ... in order, got {p}")
        if len(set(variables)) != len(variables):
            self.error("repeated variable in left-hand side")
        return state, letter, {v: i for i, v in enumerate(variables, 1)}, tuple(pattern), len(params)

    def call_target(self, variables) -> int:
        self.expect("<")
        var_tok = self.tok
        v = self.name()
        self.expect(">")
        if v not in variables:
            self.error(f"unbound variable {v}", var_tok)
        return variables[v]

    def tree_rhs(self, variables, nparams):
        tok = self.tok
        n = self.name()
        if self.at("<"):
            child = self.call_target(variables)
            args = self.args(variables, nparams) if self.at("(") else ()
            return Call(n, child, args)
        args = self.args(variables, nparams) if self.at("(") else ()
        m = _PARAM.match(n)
        if m:
            j = int(m.group(1))
            if args or not 1 <= j <= nparams:
                self.error(f"bad parameter {n}", tok)
            return Param(j)
        return Out(n, args)

    def args(self, variables, nparams):
        self.expect("(")
        out = [self.tree_rhs(variables, nparams)]
        while self.accept(","):
            out.append(self.tree_rhs(variables, nparams))
        self.expect(")")
        return tuple(out)

    def string_rhs(self, variables):
        items = []
        while True:
            if self.tok.kind == "str":
                items.extend(self.tok.text[1:-1])
                self.i += 1
            else:
                n = self.name()
                if self.at("<"):
                    items.append(Call(n, self.call_target(variables)))
                else:
                    items.extend(n)
            if not self.accept("."):
                return tuple(items)

    def rules(self, mode):
        self.expect("{")
        out = []
        while not self.accept("}"):
            state, letter, variables, pattern, nparams = self.lhs()
            self.expect("->")
            rhs = self.string_rhs(variables) if mode == "string" else self.tree_rhs(variables, nparams)
            out.append((Rule(state, letter, pattern, rhs), nparams))
            self.end_item()
        return out


def parse_definition(text: str):
    """Parse any definition: TopDownTT, MacroTT, Sst or RegisterMachine."""
    p = Parser(text)
    if p.at("sst") and p.peek().text == "{":
        p.i += 1
        obj = _parse_sst_body(p)
    elif p.at("machine") and p.peek().text == "{":
        p.i += 1
        obj = _parse_machine_body(p)
    else:
        obj = _parse_transducer(p)
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return obj


def _parse_transducer(p: Parser):
    from .mtt import MacroTT
    from .tdtt import TopDownTT, check_wellformed
    from .mtt import check_wellformed as mtt_check

    sections = {}
    kind = None
    la_start = rules_start = None
    while p.tok.kind != "eof":
        tok = p.tok
        kw = p.name()
        if kw in sections:
            p.error(f"duplicate section {kw}", tok)
        if kw == "type":
            kind = p.name()
            if kind not in ("tdtt", "mtt"):
                p.error(f"unknown transducer type {kind}")
            sections[kw] = kind
        elif kw == "input":
            sections[kw] = p.ranked_list()
        elif kw == "output":
            if p.accept("string"):
                sections[kw] = ("string", p.name_list())
            else:
                sections[kw] = ("tree", p.ranked_list())
        elif kw == "neutral":
            sections[kw] = p.name_list()
        elif kw == "states":
            p.expect("{")
            states = []
            if not p.accept("}"):
                while True:
                    q = p.name()
                    states.append((q, p.integer() if p.accept(":") else None))
                    if not p.accept(","):
                        break
                p.expect("}")
            sections[kw] = states
        elif kw == "initial":
            sections[kw] = p.name()
        elif kw == "lookahead":
            la_start = p.i
            depth = 0
            while True:  # parsed once the input alphabet is known
                if p.accept("{"):
                    depth += 1
                elif p.accept("}"):
                    depth -= 1
                    if depth == 0:
                        break
                elif p.tok.kind == "eof":
                    p.error("unterminated lookahead section")
                else:
                    p.i += 1
            sections[kw] = True
        elif kw == "rules":
            rules_start = p.i
            depth = 0
            while True:
                if p.accept("{"):
                    depth += 1
                elif p.accept("}"):
                    depth -= 1
                    if depth == 0:
                        break
                elif p.tok.kind == "eof":
                    p.error("unterminated rules section")
                else:
                    p.i += 1
            sections[kw] = True
        else:
            p.error(f"unknown section {kw!r}", tok)
        p.end_item()

    for required in ("input", "output", "states", "initial", "rules"):
        if required not in sections:
            raise TermSyntaxError(f"missing section {required!r}")
    end = p.i
    try:
        inp = RankedAlphabet.of(sections["input"])
        out_kind, out_letters = sections["output"]
        neutral = sections.get("neutral", ())
        if out_kind == "string":
            output = tuple(out_letters)
        else:
            output = RankedAlphabet.of(out_letters, neutral)
    except ValueError as e:
        raise TermSyntaxError(str(e)) from None
    la = None
    if la_start is not None:
        p.i = la_start
        la = p.lookahead(inp)
    states = sections["states"]
    with_arity = any(n is not None for _, n in states)
    if kind is None:
        kind = "mtt" if with_arity else "tdtt"
    if kind == "mtt" and out_kind == "string":
        raise TermSyntaxError("macro transducers produce trees; use a unary output alphabet")
    p.i = rules_start
    parsed = p.rules("string" if out_kind == "string" else "tree")
    p.i = end
    if kind == "tdtt":
        if with_arity and any(n for _, n in states):
            raise TermSyntaxError("top-down transducer states take no parameters")
        for rule, nparams in parsed:
            if nparams:
                raise TermSyntaxError(f"top-down rule for {rule.state} has parameters")
        obj = TopDownTT(inp, output, tuple(q for q, _ in states), sections["initial"],
                        tuple(r for r, _ in parsed), la)
        diags = check_wellformed(obj)
    else:
        arities = {q: (n or 0) for q, n in states}
        for rule, nparams in parsed:
            if rule.state in arities and nparams != arities[rule.state]:
                raise TermSyntaxError(
                    f"rule for {rule.state} declares {nparams} parameters, state has arity {arities[rule.state]}"
                )
        obj = MacroTT(inp, output, tuple(arities.items()), sections["initial"], tuple(r for r, _ in parsed), la)
        diags = mtt_check(obj)
    if diags:
        raise TermSyntaxError("; ".join(d.message for d in diags))
    return obj


# ---------------------------------------------------------------------------
# SST and register machine blocks


def _sst_expr(p: Parser, registers):
    from .sst import Reg

    if p.accept("undefined"):
        return UNDEFINED
    items = []
    while True:
        if p.tok.kind == "str":
            items.extend(p.tok.text[1:-1])
            p.i += 1
        else:
            n = p.name()
            if n in registers:
                items.append(Reg(n))
            else:
                items.extend(n)
        if not p.accept("."):
            return tuple(items)


def _parse_sst_body(p: Parser):
    from .sst import Sst

    p.expect("{")
    fields = {}
    update = {}
    final = {}
    while not p.accept("}"):
        tok = p.tok
        kw = p.name()
        if kw in ("input", "output") and p.at("{"):
            fields[kw] = p.name_list()
        elif kw in ("states", "registers"):
            fields[kw] = p.name_list()
        elif kw == "initial":
            fields[kw] = p.name()
        elif kw == "init":
            regs = fields.get("registers", ())
            init = {}
            while True:
                r = p.name()
                p.expect("=")
                init[r] = _sst_expr(p, regs)
                if not p.accept(","):
                    break
            fields[kw] = init
        elif kw == "on":
            regs = fields.get("registers", ())
            s = p.name()
            p.expect(",")
            a = p.name()
            p.expect("->")
            nxt = p.name()
            if not p.accept("with"):
                p.error("expected 'with'")
            upd = {}
            while True:
                r = p.name()
                p.expect("=")
                upd[r] = _sst_expr(p, regs)
                if not p.accept(","):
                    break
            if (s, a) in update:
                p.error(f"duplicate transition for {s},{a}", tok)
            update[(s, a)] = (nxt, upd)
        elif kw == "output":
            s = p.name()
            p.expect("=")
            final[s] = _sst_expr(p, fields.get("registers", ()))
        else:
            p.error(f"unknown sst item {kw!r}", tok)
        p.end_item()
    try:
        return Sst(fields["input"], fields["output"], fields["states"], fields["initial"],
                   fields["registers"], fields.get("init", {}), update, final)
    except KeyError as e:
        raise TermSyntaxError(f"sst block is missing {e.args[0]!r}") from None
    except ValueError as e:
        raise TermSyntaxError(f"bad sst: {e}") from None


def _machine_expr(p: Parser, string: bool):
    from .tdtt import RegRef

    if p.accept("undefined"):
        return UNDEFINED

    def item():
        n = p.name()
        if p.accept("@"):
            return RegRef(p.integer(), n)
        return n

    if string:
        items = []
        while True:
            if p.tok.kind == "str":
                items.extend(p.tok.text[1:-1])
                p.i += 1
            else:
                x = item()
                items.extend([x] if isinstance(x, RegRef) else list(x))
            if not p.accept("."):
                return tuple(items)

    def tree():
        x = item()
        if isinstance(x, RegRef):
            return x
        args = []
        if p.accept("("):
            args.append(tree())
            while p.accept(","):
                args.append(tree())
            p.expect(")")
        return Out(x, tuple(args))

    return tree()


def _parse_machine_body(p: Parser):
    from .tdtt import RegisterMachine

    p.expect("{")
    fields = {}
    transitions = {}
    while not p.accept("}"):
        tok = p.tok
        kw = p.name()
        if kw == "input":
            fields[kw] = RankedAlphabet.of(p.ranked_list())
        elif kw == "output":
            if p.accept("string"):
                fields[kw] = tuple(p.name_list())
            else:
                fields[kw] = RankedAlphabet.of(p.ranked_list())
        elif kw in ("states", "registers"):
            fields[kw] = p.name_list()
        elif kw == "result":
            fields[kw] = p.name()
        elif kw == "on":
            string = not isinstance(fields.get("output"), RankedAlphabet)
            letter = p.name()
            vec = []
            if p.accept("("):
                vec.append(p.name())
                while p.accept(","):
                    vec.append(p.name())
                p.expect(")")
            p.expect("->")
            nxt = p.name()
            if not p.accept("with"):
                p.error("expected 'with'")
            upd = {}
            while True:
                r = p.name()
                p.expect("=")
                upd[r] = _machine_expr(p, string)
                if not p.accept(","):
                    break
            transitions[(letter, tuple(vec))] = (nxt, upd)
        else:
            p.error(f"unknown machine item {kw!r}", tok)
        p.end_item()
    try:
        return RegisterMachine(fields["input"], fields["output"], fields["states"], fields["registers"],
                               fields["result"], transitions)
    except KeyError as e:
        raise TermSyntaxError(f"machine block is missing {e.args[0]!r}") from None
    except ValueError as e:
        raise TermSyntaxError(f"bad machine: {e}") from None


# ---------------------------------------------------------------------------
# Printing


def format_rhs(e, variables=None) -> str:
    """Print a tree RHS; calls refer to children as ``t1, t2, ...``."""
    var = (lambda i: variables[i - 1]) if variables else (lambda i: f"t{i}")
    if isinstance(e, tuple):
        if not e:
            return "''"
        parts = []
        for item in e:
            parts.append(f"{item.state}<{var(item.child)}>" if isinstance(item, Call) else f"'{item}'")
        return " . ".join(parts)
    if isinstance(e, Param):
        return str(e)
    if isinstance(e, Call):
        head = f"{e.state}<{var(e.child)}>"
        if e.args:
            head += "(" + ", ".join(format_rhs(a, variables) for a in e.args) + ")"
        return head
    if e.args:
        return e.label + "(" + ", ".join(format_rhs(a, variables) for a in e.args) + ")"
    return e.label


def format_lhs(rule: Rule, arity: int, nparams: int = 0) -> str:
    s = f"{rule.state}<{rule.letter}"
    if arity:
        s += "(" + ",".join(f"t{i}" + (f"|{p}" if p is not None else "") for i, p in enumerate(rule.pattern, 1)) + ")"
    s += ">"
    if nparams:
        s += "(" + ",".join(f"x{j}" for j in range(1, nparams + 1)) + ")"
    return s


def format_dbta(a: Dbta, indent="  ") -> str:
    lines = ["lookahead {", f"{indent}states {' '.join(a.states)};"]
    for letter, k in a.alphabet.letters:
        for (l2, vec), r in a.delta.items():
            if l2 == letter:
                lhs = f"{letter}({','.join(vec)})" if vec else letter
                lines.append(f"{indent}delta {lhs} -> {r};")
    lines.append("}")
    return "\n".join(lines)


def _alphabet(a: RankedAlphabet) -> str:
    return "{" + ", ".join(f"{n}:{k}" for n, k in a.letters) + "}"


def format_transducer(tt) -> str:
    from .mtt import MacroTT

    macro = isinstance(tt, MacroTT)
    lines = []
    if macro:
        lines.append("type mtt")
    lines.append(f"input {_alphabet(tt.input)}")
    if isinstance(tt.output, RankedAlphabet):
        lines.append(f"output {_alphabet(tt.output)}")
        if tt.output.neutral:
            lines.append("neutral {" + ", ".join(n for n in tt.output.names if n in tt.output.neutral) + "}")
    else:
        lines.append("output string {" + ", ".join(tt.output) + "}")
    if macro:
        lines.append("states {" + ", ".join(f"{q}:{n}" for q, n in tt.states) + "}")
    else:
        lines.append("states {" + ", ".join(tt.states) + "}")
    lines.append(f"initial {tt.initial}")
    if tt.lookahead is not None:
        lines.append(format_dbta(tt.lookahead))
    lines.append("rules {")
    arities = dict(tt.states) if macro else {}
    for rule in tt.rules:
        k = tt.input.arity(rule.letter)
        lines.append(f"  {format_lhs(rule, k, arities.get(rule.state, 0))} -> {format_rhs(rule.rhs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _format_sst_expr(e, registers) -> str:
    from .sst import Reg

    if e is UNDEFINED:
        return "undefined"
    if not e:
        return '""'
    return ".".join(item.name if isinstance(item, Reg) else f"'{item}'" for item in e)


def format_sst(s) -> str:
    lines = ["sst {"]
    lines.append("  input {" + ", ".join(s.input) + "};")
    lines.append("  output {" + ", ".join(s.output) + "};")
    lines.append("  states {" + ", ".join(s.states) + "};")
    lines.append(f"  initial {s.initial};")
    lines.append("  registers {" + ", ".join(s.registers) + "};")
    lines.append("  init " + ", ".join(f"{r}={_format_sst_expr(s.init[r], s.registers)}" for r in s.registers) + ";")
    for (st, a), (nxt, upd) in s.update.items():
        ups = ", ".join(f"{r}={_format_sst_expr(upd[r], s.registers)}" for r in s.registers)
        lines.append(f"  on {st},{a} -> {nxt} with {ups};")
    for st, e in s.final.items():
        lines.append(f"  output {st} = {_format_sst_expr(e, s.registers)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _format_machine_expr(e, string) -> str:
    from .tdtt import RegRef

    if e is UNDEFINED:
        return "undefined"
    if string:
        if not e:
            return "''"
        return " . ".join(f"{i.register}@{i.child}" if isinstance(i, RegRef) else f"'{i}'" for i in e)
    if isinstance(e, RegRef):
        return f"{e.register}@{e.child}"
    if e.args:
        return e.label + "(" + ", ".join(_format_machine_expr(a, False) for a in e.args) + ")"
    return e.label


def format_machine(m) -> str:
    lines = ["machine {", f"  input {_alphabet(m.input)};"]
    if m.string_output:
        lines.append("  output string {" + ", ".join(m.output) + "};")
    else:
        lines.append(f"  output {_alphabet(m.output)};")
    lines.append("  states {" + ", ".join(m.states) + "};")
    lines.append("  registers {" + ", ".join(m.registers) + "};")
    lines.append(f"  result {m.result};")
    for (letter, vec), (nxt, upd) in m.transitions.items():
        lhs = f"{letter}({','.join(vec)})" if vec else letter
        ups = ", ".join(f"{r} = {_format_machine_expr(upd[r], m.string_output)}" for r in m.registers)
        lines.append(f"  on {lhs} -> {nxt} with {ups};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_definition(obj) -> str:
    from .sst import Sst
    from .tdtt import RegisterMachine

    if isinstance(obj, Sst):
        return format_sst(obj)
    if isinstance(obj, RegisterMachine):
        return format_machine(obj)
    return format_transducer(obj)
