"""Text format: queries, completeness statements and facts in one document.

    % comment
    q_ppb(N) :- pupil(N,C,S), school(S,primary,merano).
    complete school(S,primary,D).
    complete pupil(N,C,S) ; school(S,T,merano).
    pupil(john,1,goethe).

``Compl(head; cond)`` is accepted as an alias of ``complete head ; cond``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .completeness import TCSet, TCStatement
from .errors import ParseError, UnsafeQuery
from .query import ConjunctiveQuery
from .terms import Atom, Const, Frozen, Term, Var

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<rule>:-)
  | (?P<punct>[(),.;])
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<quoted>'[^'\n]*')
  | (?P<number>[0-9]+)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<frozen>~)
    """,
    re.VERBOSE,
)

_VAR_NAME = re.compile(r"[A-Z][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "frozen":
            raise ParseError("'~' marks frozen terms and is not allowed in input", line, col)
        if kind != "ws":
            out.append(Token(kind, tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = pos + tok.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


@dataclass
class Document:
    queries: dict[str, ConjunctiveQuery] = field(default_factory=dict)
    statements: TCSet = field(default_factory=TCSet)
    facts: frozenset[Atom] = frozenset()
    spans: dict[str, tuple[int, int]] = field(default_factory=dict)

    def query(self, name: str) -> ConjunctiveQuery:
        try:
            return self.queries[name]
        except KeyError:
            known = ", ".join(self.queries) or "none"
            raise KeyError(f"no query named {name!r} (known: {known})") from None


class _Parser:
    def __init__(self, text: str, allow_unsafe: bool):
        self.toks = tokenize(text)
        self.i = 0
        self.allow_unsafe = allow_unsafe
        self.arities: dict[str, tuple[int, Token]] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind in ("quoted", "eof"):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        t = self.tok
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "rule", "ident", "var")

    def term(self) -> Term:
        t = self.tok
        self.i += 1
        if t.kind == "var":
            return Var(t.text)
        if t.kind == "quoted":
            return Const(t.text[1:-1])
        if t.kind in ("number", "ident"):
            return Const(t.text)
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}", t)

    def terms(self) -> list[Term]:
        out = [self.term()]
        while self.at(","):
            self.i += 1
            out.append(self.term())
        return out

    def atom(self) -> Atom:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected a relation name, found {t.text or 'end of input'!r}")
        self.i += 1
        self.expect("(")
        args = self.terms()
        self.expect(")")
        a = Atom(t.text, args)
        self.check_arity(a, t)
        return a

    def check_arity(self, a: Atom, t: Token) -> None:
        prev = self.arities.get(a.relation)
        if prev is None:
            self.arities[a.relation] = (a.arity, t)
        elif prev[0] != a.arity:
            raise self.error(
                f"relation {a.relation} has arity {a.arity} here but {prev[0]} at line {prev[1].line}", t
            )

    def atoms(self) -> list[Atom]:
        if self.tok.kind == "ident" and self.tok.text == "true" and self.peek().text != "(":
            self.i += 1
            return []
        out = [self.atom()]
        while self.at(","):
            self.i += 1
            out.append(self.atom())
        return out

    def statement(self, alias: bool) -> TCStatement:
        head = self.atom()
        cond: list[Atom] = []
        if self.at(";"):
            self.i += 1
            cond = self.atoms()
        if alias:
            self.expect(")")
        self.expect(".")
        return TCStatement(head, cond)

    def document(self) -> Document:
        doc = Document()
        stmts: list[TCStatement] = []
        facts: set[Atom] = set()
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "ident" and t.text == "complete" and self.peek().kind == "ident":
                self.i += 1
                stmts.append(self.statement(alias=False))
            elif t.kind == "var" and t.text == "Compl" and self.peek().text == "(":
                self.i += 2
                stmts.append(self.statement(alias=True))
            elif t.kind == "ident" and self.peek().text in ("(", ":-"):
                self.item(doc, facts)
            else:
                raise self.error(f"expected a query, statement or fact, found {t.text!r}")
        labelled = [TCStatement(s.head, s.condition, f"c{i + 1}") for i, s in enumerate(stmts)]
        doc.statements = TCSet(labelled)
        doc.facts = frozenset(facts)
        return doc

    def item(self, doc: Document, facts: set[Atom]) -> None:
        start = self.tok
        name = start.text
        if self.peek().text == ":-":
            self.i += 1
            head: list[Term] = []
        else:
            self.i += 1
            self.expect("(")
            head = [] if self.at(")") else self.terms()
            self.expect(")")
        if self.at(":-"):
            self.i += 1
            body = self.atoms()
            self.expect(".")
            if name in doc.queries:
                raise self.error(f"query {name} defined twice", start)
            try:
                q = ConjunctiveQuery(name, head, body, generalized=self.allow_unsafe)
            except UnsafeQuery as e:
                raise self.error(str(e), start) from None
            doc.queries[name] = q
            doc.spans[name] = (start.line, start.col)
            return
        self.expect(".")
        fact = Atom(name, head)
        if not head:
            raise self.error("facts need at least one argument", start)
        bad = [str(v) for v in fact.variables()]
        if bad:
            raise self.error(f"fact {fact} is not ground (variables {', '.join(bad)})", start)
        self.check_arity(fact, start)
        facts.add(fact)


def parse(text: str, allow_unsafe: bool = False) -> Document:
    return _Parser(text, allow_unsafe).document()


def parse_query(text: str) -> ConjunctiveQuery:
    doc = parse(text)
    if len(doc.queries) != 1:
        raise ParseError("expected exactly one query")
    return next(iter(doc.queries.values()))


def parse_statements(text: str) -> TCSet:
    return parse(text).statements


# -- rendering -----------------------------------------------------------------------


def _renaming(terms: Iterable[Term]) -> dict[Var, Var]:
    seen = dict.fromkeys(t for t in terms if isinstance(t, Var))
    if all(_VAR_NAME.fullmatch(v.name) for v in seen):
        return {}
    return {v: Var(f"V{i}") for i, v in enumerate(seen)}


def _term_text(t: Term, ren: dict) -> str:
    return str(ren.get(t, t)) if isinstance(t, Var) else str(t)


def _atom_text(a: Atom, ren: dict) -> str:
    return f"{a.relation}({','.join(_term_text(t, ren) for t in a.args)})"


def format_query(q: ConjunctiveQuery, name: str | None = None) -> str:
    ren = _renaming((*q.head, *(t for a in q.body for t in a.args)))
    head = ",".join(_term_text(t, ren) for t in q.head)
    body = ", ".join(_atom_text(a, ren) for a in q.body) or "true"
    return f"{name or q.name}({head}) :- {body}."


def format_statement(c: TCStatement) -> str:
    ren = _renaming(t for a in c.atoms() for t in a.args)
    head = _atom_text(c.head, ren)
    if not c.condition:
        return f"complete {head}."
    return f"complete {head} ; {', '.join(_atom_text(a, ren) for a in c.condition)}."


def format_fact(a: Atom) -> str:
    return f"{a}."


def format_instance(facts: Iterable[Atom]) -> list[str]:
    return [format_fact(a) for a in sorted(facts, key=Atom.sort_key)]


def format_document(doc: Document) -> str:
    lines = [format_query(q) for q in doc.queries.values()]
    lines += [format_statement(c) for c in doc.statements]
    lines += format_instance(doc.facts)
    return "\n".join(lines) + "\n"


def format_queries(queries: list[ConjunctiveQuery], name: str | None = None) -> str:
    if not queries:
        return "none"
    return "\n".join(format_query(q, name) for q in queries)


def term_tree(t: Term) -> dict:
    if isinstance(t, Var):
        return {"var": t.name}
    if isinstance(t, Frozen):
        return {"frozen": t.name}
    return {"const": t.name}


def atom_tree(a: Atom, ren: dict | None = None) -> dict:
    ren = ren or {}
    return {"relation": a.relation, "args": [term_tree(ren.get(t, t)) for t in a.args]}


def query_tree(q: ConjunctiveQuery, name: str | None = None) -> dict:
    ren = _renaming((*q.head, *(t for a in q.body for t in a.args)))
    return {
        "name": name or q.name,
        "text": format_query(q, name),
        "head": [term_tree(ren.get(t, t)) for t in q.head],
        "body": [atom_tree(a, ren) for a in q.body],
        "safe": q.is_safe,
    }


def statement_tree(c: TCStatement) -> dict:
    return {
        "label": c.label,
        "text": format_statement(c),
        "head": atom_tree(c.head),
        "condition": [atom_tree(a) for a in c.condition],
    }


def _tree_term(x: dict) -> Term:
    if "var" in x:
        return Var(x["var"])
    if "frozen" in x:
        return Frozen(x["frozen"])
    return Const(x["const"])


def query_from_tree(x: dict) -> ConjunctiveQuery:
    body = [Atom(a["relation"], map(_tree_term, a["args"])) for a in x["body"]]
    return ConjunctiveQuery(x["name"], map(_tree_term, x["head"]), body, generalized=not x.get("safe", True))


def debug_dump(atoms: Iterable[Atom]) -> str:
    """Render facts as-is, frozen terms included (``~X``)."""
    return " ".join(f"{a}." for a in sorted(atoms, key=Atom.sort_key))

