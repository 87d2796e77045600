"""Lexer, parser and canonical serializer for OSL operator specifications.

The surface syntax follows a TableGen-like record style, one operator per
file (see docs/osl-grammar.md):

    def DepthToSpaceTest : Op<"op_depth_to_space"> {
      attributes = [ Attr<attr_name = "blocksize", type_list = [i32],
                          min_val_list = ["1"], max_val_list = ["4"]> ];
      inputs = [ Tensor<index = 0, basic_type_list = [f32], min_dim = 4,
                        max_dim = 4> ];
      outputs = [ Tensor<index = 0, basic_type_list = [f32], min_dim = 4,
                         max_dim = 4> ];
      properties = [];
    }

Unfilled fields mean "no constraint" and take documented defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    AttributeSpec,
    AttrType,
    DataType,
    ImplicitProperty,
    OperatorSpec,
    TensorSpec,
    ValueRanges,
)

_TYPE_NAMES = {t.value: t for t in DataType}
_PROPERTY_NAMES = {p.value: p for p in ImplicitProperty}
_PUNCT = set("[]{}<>,;:=")

_TENSOR_FIELDS = (
    "index", "basic_type_list", "min_dim", "max_dim", "min_val_list",
    "max_val_list", "axis_bound", "optional", "normal_distribution",
)
_ATTR_FIELDS = (
    "attr_name", "type_list", "default_value", "min_val_list", "max_val_list",
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(Exception):
    """Syntax or structural error with an exact source location."""

    def __init__(self, span: SourceSpan, expected: str, found: str):
        self.span = span
        self.expected = expected
        self.found = found
        super().__init__(f"{span}: expected {expected}, found {found}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT INT FLOAT STRING TYPE BOOL PUNCT EOF
    text: str
    value: object
    line: int
    column: int


def lex(text: str, filename: str = "<osl>") -> list[Token]:
    """Tokenize OSL source. Raises ParseError on an illegal character."""
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def span():
        return SourceSpan(filename, line, col)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if c == "/" and text[i + 1:i + 2] == "/":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if c in _PUNCT:
            tokens.append(Token("PUNCT", c, c, line, col))
            advance(1)
            continue
        if c == '"':
            start_line, start_col = line, col
            advance(1)
            buf = []
            while True:
                if i >= n or text[i] == "\n":
                    raise ParseError(SourceSpan(filename, start_line, start_col),
                                     "closing '\"'", "end of line")
                ch = text[i]
                if ch == "\\":
                    if i + 1 >= n:
                        raise ParseError(span(), "escape character",
                                         "end of input")
                    esc = text[i + 1]
                    if esc not in ('"', "\\"):
                        raise ParseError(span(), "escape \\\" or \\\\",
                                         repr(esc))
                    buf.append(esc)
                    advance(2)
                    continue
                if ch == '"':
                    advance(1)
                    break
                buf.append(ch)
                advance(1)
            tokens.append(Token("STRING", '"' + "".join(buf) + '"',
                                "".join(buf), start_line, start_col))
            continue
        if c.isdigit() or (c == "-" and text[i + 1:i + 2].isdigit()):
            start_line, start_col = line, col
            j = i + 1
            is_float = False
            while j < n and (text[j].isdigit() or text[j] in ".eE+-"):
                if text[j] in ".eE":
                    is_float = True
                elif text[j] in "+-" and text[j - 1] not in "eE":
                    break
                j += 1
            raw = text[i:j]
            try:
                value = float(raw) if is_float else int(raw)
            except ValueError:
                raise ParseError(SourceSpan(filename, start_line, start_col),
                                 "numeric literal", repr(raw)) from None
            tokens.append(Token("FLOAT" if is_float else "INT", raw, value,
                                start_line, start_col))
            advance(j - i)
            continue
        if c.isalpha() or c == "_":
            start_line, start_col = line, col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in ("true", "false"):
                tokens.append(Token("BOOL", word, word == "true",
                                    start_line, start_col))
            elif word in _TYPE_NAMES:
                tokens.append(Token("TYPE", word,
                                    AttrType(_TYPE_NAMES[word], False),
                                    start_line, start_col))
            elif word.endswith("_v1") and word[:-3] in _TYPE_NAMES:
                tokens.append(Token("TYPE", word,
                                    AttrType(_TYPE_NAMES[word[:-3]], True),
                                    start_line, start_col))
            else:
                tokens.append(Token("IDENT", word, word,
                                    start_line, start_col))
            advance(j - i)
            continue
        raise ParseError(span(), "a token", repr(c))
    tokens.append(Token("EOF", "", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.filename = filename
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, expected: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        found = tok.text or "end of input"
        return ParseError(SourceSpan(self.filename, tok.line, tok.column),
                          expected, found)

    def expect(self, kind: str, text: str | None = None,
               what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            raise self.error(what or text or kind.lower())
        return self.next()

    def expect_punct(self, ch: str) -> Token:
        return self.expect("PUNCT", ch, f"'{ch}'")

    # -- values ------------------------------------------------------------

    def parse_list(self, item):
        self.expect_punct("[")
        items = []
        if not self.at_punct("]"):
            items.append(item())
            while self.at_punct(","):
                self.next()
                items.append(item())
        self.expect_punct("]")
        return items

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.text == ch

    def parse_int(self) -> int:
        return self.expect("INT", what="an integer").value

    def parse_bool(self) -> bool:
        return self.expect("BOOL", what="true or false").value

    def parse_string(self) -> str:
        return self.expect("STRING", what="a quoted string").value

    def parse_scalar_type(self) -> DataType:
        tok = self.expect("TYPE", what="an element type")
        if tok.value.vector:
            raise ParseError(SourceSpan(self.filename, tok.line, tok.column),
                             "a scalar element type", tok.text)
        return tok.value.element

    def parse_attr_type(self) -> AttrType:
        return self.expect("TYPE", what="an attribute type").value

    def parse_range_value(self):
        # Range endpoints are written as quoted strings ("20"); bare numeric
        # literals are accepted as well.
        tok = self.peek()
        if tok.kind == "STRING":
            self.next()
            try:
                return int(tok.value)
            except ValueError:
                pass
            try:
                return float(tok.value)
            except ValueError:
                raise ParseError(
                    SourceSpan(self.filename, tok.line, tok.column),
                    "a numeric range endpoint", repr(tok.value)) from None
        if tok.kind in ("INT", "FLOAT"):
            self.next()
            return tok.value
        raise self.error("a range endpoint")

    # -- records -----------------------------------------------------------

    def parse_fields(self, allowed, what: str):
        self.expect_punct("<")
        fields = {}
        spans = {}
        while not self.at_punct(">"):
            name_tok = self.expect("IDENT", what=f"a {what} field name")
            if name_tok.value not in allowed:
                raise ParseError(
                    SourceSpan(self.filename, name_tok.line, name_tok.column),
                    "one of " + ", ".join(allowed), name_tok.text)
            if name_tok.value in fields:
                raise ParseError(
                    SourceSpan(self.filename, name_tok.line, name_tok.column),
                    "a unique field", f"duplicate {name_tok.text}")
            self.expect_punct("=")
            fields[name_tok.value] = self.parse_field_value(name_tok.value)
            spans[name_tok.value] = name_tok
            if self.at_punct(","):
                self.next()
                continue
            break
        self.expect_punct(">")
        return fields, spans

    def parse_field_value(self, name: str):
        if name in ("index", "min_dim", "max_dim"):
            return self.parse_int()
        if name in ("axis_bound", "optional", "normal_distribution"):
            return self.parse_bool()
        if name in ("attr_name", "default_value"):
            return self.parse_string()
        if name == "type_list":
            return self.parse_list(self.parse_attr_type)
        if name == "basic_type_list":
            return self.parse_list(self.parse_scalar_type)
        if name in ("min_val_list", "max_val_list"):
            return self.parse_list(self.parse_range_value)
        raise self.error(f"a value for {name}")

    def build_ranges(self, fields, spans) -> ValueRanges | None:
        mins = fields.pop("min_val_list", None)
        maxs = fields.pop("max_val_list", None)
        if mins is None and maxs is None:
            return None
        mins = mins or []
        maxs = maxs or []
        if len(mins) != len(maxs):
            tok = spans.get("max_val_list") or spans.get("min_val_list")
            raise ParseError(
                SourceSpan(self.filename, tok.line, tok.column),
                "min_val_list and max_val_list of equal length",
                f"lengths {len(mins)} and {len(maxs)}")
        for lo, hi in zip(mins, maxs):
            if lo > hi:
                tok = spans["min_val_list"]
                raise ParseError(
                    SourceSpan(self.filename, tok.line, tok.column),
                    "range minimum <= maximum", f"[{lo}, {hi}]")
        return ValueRanges.from_lists(mins, maxs)

    def parse_attr(self) -> AttributeSpec:
        self.expect("IDENT", "Attr", "Attr<...>")
        fields, spans = self.parse_fields(_ATTR_FIELDS, "attribute")
        ranges = self.build_ranges(fields, spans)
        name_tok = spans.get("attr_name") or self.peek()
        if "attr_name" not in fields:
            raise ParseError(
                SourceSpan(self.filename, name_tok.line, name_tok.column),
                "an attr_name field", "none")
        return AttributeSpec(
            attr_name=fields["attr_name"],
            type_list=tuple(fields.get("type_list", ())),
            default_value=fields.get("default_value"),
            value_ranges=ranges,
        )

    def parse_tensor(self, ordinal: int) -> TensorSpec:
        self.expect("IDENT", "Tensor", "Tensor<...>")
        fields, spans = self.parse_fields(_TENSOR_FIELDS, "tensor")
        ranges = self.build_ranges(fields, spans)
        return TensorSpec(
            index=fields.get("index", ordinal),
            basic_type_list=tuple(fields.get("basic_type_list", ())),
            min_dim=fields.get("min_dim", 0),
            max_dim=fields.get("max_dim", 4),
            value_ranges=ranges,
            axis_bound=fields.get("axis_bound", False),
            optional=fields.get("optional", False),
            normal_distribution=fields.get("normal_distribution", False),
        )

    def parse_property(self) -> ImplicitProperty:
        tok = self.expect("IDENT", what="a property name")
        prop = _PROPERTY_NAMES.get(tok.value)
        if prop is None:
            raise ParseError(
                SourceSpan(self.filename, tok.line, tok.column),
                "one of " + ", ".join(sorted(_PROPERTY_NAMES)), tok.text)
        return prop

    # -- top level ----------------------------------------------------------

    def parse_spec(self) -> OperatorSpec:
        self.expect("IDENT", "def", "'def'")
        op_name = self.expect("IDENT", what="an operator name").value
        self.expect_punct(":")
        self.expect("IDENT", "Op", "Op<\"...\">")
        self.expect_punct("<")
        op_code = self.parse_string()
        self.expect_punct(">")
        self.expect_punct("{")

        entries: dict[str, object] = {}
        while not self.at_punct("}"):
            name_tok = self.expect(
                "IDENT",
                what="attributes, inputs, outputs, properties or type_tied")
            name = name_tok.value
            if name not in ("attributes", "inputs", "outputs", "properties",
                            "type_tied"):
                raise ParseError(
                    SourceSpan(self.filename, name_tok.line, name_tok.column),
                    "attributes, inputs, outputs, properties or type_tied",
                    name_tok.text)
            if name in entries:
                raise ParseError(
                    SourceSpan(self.filename, name_tok.line, name_tok.column),
                    "a unique entry", f"duplicate {name}")
            if name == "outputs" and "inputs" not in entries:
                entries["_outputs_first"] = name_tok
            self.expect_punct("=")
            if name == "attributes":
                entries[name] = self.parse_list(self.parse_attr)
            elif name in ("inputs", "outputs"):
                counter = iter(range(10000))
                entries[name] = self.parse_list(
                    lambda: self.parse_tensor(next(counter)))
            elif name == "properties":
                entries[name] = self.parse_list(self.parse_property)
            else:
                entries[name] = self.parse_bool()
            self.expect_punct(";")
        self.expect_punct("}")
        self.expect("EOF", what="end of file (one operator per file)")

        if "_outputs_first" in entries and "inputs" in entries:
            tok = entries["_outputs_first"]
            raise ParseError(
                SourceSpan(self.filename, tok.line, tok.column),
                "inputs to precede outputs", "outputs first")

        return OperatorSpec(
            op_name=op_name,
            op_code=op_code,
            attributes=tuple(entries.get("attributes", ())),
            inputs=tuple(entries.get("inputs", ())),
            outputs=tuple(entries.get("outputs", ())),
            properties=frozenset(entries.get("properties", ())),
            type_tied=entries.get("type_tied", False),
        )


def parse(text: str, filename: str = "<osl>") -> OperatorSpec:
    """Parse one OSL document. Raises ParseError with an exact location."""
    return _Parser(lex(text, filename), filename).parse_spec()


def parse_file(path) -> OperatorSpec:
    # Invalid UTF-8 degrades to replacement characters, which the lexer
    # rejects with a located ParseError instead of a decode crash.
    with open(path, encoding="utf-8", errors="replace") as fh:
        return parse(fh.read(), str(path))


# -- canonical serialization -----------------------------------------------


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format_range_value(v) -> str:
    return _quote(repr(int(v)) if isinstance(v, int) else repr(v))


def _tensor_text(t: TensorSpec) -> str:
    parts = [
        f"index = {t.index}",
        "basic_type_list = [" + ", ".join(d.value for d in t.basic_type_list) + "]",
        f"min_dim = {t.min_dim}",
        f"max_dim = {t.max_dim}",
    ]
    if t.value_ranges is not None:
        parts.append("min_val_list = [" + ", ".join(
            _format_range_value(lo) for lo, _ in t.value_ranges.ranges) + "]")
        parts.append("max_val_list = [" + ", ".join(
            _format_range_value(hi) for _, hi in t.value_ranges.ranges) + "]")
    if t.axis_bound:
        parts.append("axis_bound = true")
    if t.optional:
        parts.append("optional = true")
    if t.normal_distribution:
        parts.append("normal_distribution = true")
    return "Tensor<" + ",\n           ".join(parts) + ">"


def _attr_text(a: AttributeSpec) -> str:
    parts = [f"attr_name = {_quote(a.attr_name)}"]
    if a.type_list:
        parts.append("type_list = [" + ", ".join(
            t.osl_name for t in a.type_list) + "]")
    if a.default_value is not None:
        parts.append(f"default_value = {_quote(a.default_value)}")
    if a.value_ranges is not None:
        parts.append("min_val_list = [" + ", ".join(
            _format_range_value(lo) for lo, _ in a.value_ranges.ranges) + "]")
        parts.append("max_val_list = [" + ", ".join(
            _format_range_value(hi) for _, hi in a.value_ranges.ranges) + "]")
    return "Attr<" + ", ".join(parts) + ">"


def serialize(spec: OperatorSpec) -> str:
    """Render a spec as canonical OSL text; parse(serialize(s)) == s."""
    lines = [f"def {spec.op_name} : Op<{_quote(spec.op_code)}> {{"]
    lines.append("  attributes = [" + (
        "\n    " + ",\n    ".join(_attr_text(a) for a in spec.attributes) + "\n  "
        if spec.attributes else "") + "];")
    for kind, tensors in (("inputs", spec.inputs), ("outputs", spec.outputs)):
        lines.append(f"  {kind} = [" + (
            "\n    " + ",\n    ".join(_tensor_text(t) for t in tensors) + "\n  "
            if tensors else "") + "];")
    props = sorted(p.value for p in spec.properties)
    lines.append("  properties = [" + ", ".join(props) + "];")
    if spec.type_tied:
        lines.append("  type_tied = true;")
    lines.append("}")
    return "\n".join(lines) + "\n"
