"""Text format for building blocks (.dslbb) and models (.dslm).

Both formats are line oriented: one statement per line, ``#`` starts a
comment outside strings, strings are double-quoted with backslash escapes.
Parsing collects every error it can recover from and raises a single
ParseFailure listing them; positions are 1-based line and column.

The serializers emit a canonical form: parsing the serialized text yields a
value equal to the original.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import (
    AttributeSpec,
    AttrValue,
    BlockbenchError,
    BuildingBlock,
    ConstraintSpec,
    DocEntry,
    ElementKind,
    MethodSpec,
    MethodStep,
    Model,
    ModelElement,
    NuanceSpec,
    PredicateSpec,
    RESERVED_ATTR_KEYS,
    ValueType,
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")
_NAME_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*")
_BARE_VALUE_RE = re.compile(r"[A-Za-z0-9_.+-]+\Z")
_BARE_PARAM_RE = re.compile(r"[A-Za-z0-9_.:+-]+\Z")
_SELECTOR_PARAM_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\[[A-Za-z_][A-Za-z0-9_-]*=[^\]\"\\]*\]\Z")

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}
_UNESCAPES = {"\n": "\\n", "\t": "\\t", "\r": "\\r", '"': '\\"', "\\": "\\\\"}


@dataclass(frozen=True)
class SourceSpan:
    line: int
    col: int


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str

    def render(self) -> str:
        return f"{self.span.line}:{self.span.col}: {self.message}"


class ParseFailure(BlockbenchError):
    """Raised after a parse that produced one or more errors."""

    def __init__(self, errors: list[ParseError]):
        self.errors = list(errors)
        head = "; ".join(e.render() for e in self.errors[:3])
        more = len(self.errors) - 3
        if more > 0:
            head += f" (+{more} more)"
        super().__init__(head)


class _LineError(Exception):
    """Internal: aborts parsing of the current line."""

    def __init__(self, error: ParseError):
        self.error = error


class _Scan:
    """Cursor over one logical source line."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.line = line_no
        self.pos = 0

    @property
    def col(self) -> int:
        return self.pos + 1

    def fail(self, message: str, col: int | None = None) -> _LineError:
        return _LineError(ParseError(SourceSpan(self.line, col if col is not None else self.col), message))

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def try_literal(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            found = self.peek() or "end of line"
            raise self.fail(f"expected '{literal}', found {found!r}" if found != "end of line"
                            else f"expected '{literal}', found end of line")
        self.pos += len(literal)

    def _token(self, pattern: re.Pattern[str], what: str) -> str:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.fail(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def ident(self, what: str = "identifier") -> str:
        return self._token(_IDENT_RE, what)

    def name_token(self, what: str = "name") -> str:
        """An element name; may start with a digit."""
        if self.peek_is_quote():
            return self.quoted()
        return self._token(_NAME_RE, what)

    def peek_is_quote(self) -> bool:
        self.skip_ws()
        return self.peek() == '"'

    def quoted(self) -> str:
        self.skip_ws()
        if self.peek() != '"':
            raise self.fail("expected string")
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise self.fail("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise self.fail("unterminated string")
                esc = self.text[self.pos + 1]
                if esc not in _ESCAPES:
                    raise self.fail(f"unknown escape '\\{esc}'", col=self.col + 1)
                out.append(_ESCAPES[esc])
                self.pos += 2
                continue
            out.append(ch)
            self.pos += 1

    def end_of_line(self) -> None:
        if not self.at_end():
            raise self.fail(f"unexpected trailing text {self.text[self.pos:].strip()!r}")


def _strip_comment(line: str) -> str:
    in_string = False
    i = 0
    while i < len(line):
        ch = line[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "#":
            return line[:i]
        i += 1
    return line


def _decode(text: str | bytes) -> str:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseFailure(
                [ParseError(SourceSpan(1, 1), f"input is not valid UTF-8: {exc.reason}")]
            ) from exc
    return text


def _lines(text: str) -> list[tuple[int, str]]:
    """Significant lines with their 1-based numbers, comments stripped."""
    out: list[tuple[int, str]] = []
    for idx, raw in enumerate(text.split("\n"), start=1):
        stripped = _strip_comment(raw.rstrip("\r"))
        if stripped.strip():
            out.append((idx, stripped))
    return out


def _param_list(scan: _Scan) -> dict[str, str]:
    """Parse ``(key=value, ...)``; values are bare runs or quoted strings."""
    scan.expect("(")
    params: dict[str, str] = {}
    scan.skip_ws()
    if scan.try_literal(")"):
        return params
    while True:
        scan.skip_ws()
        key_col = scan.col
        key = scan.ident("parameter name")
        scan.expect("=")
        scan.skip_ws()
        if scan.peek_is_quote():
            value = scan.quoted()
        else:
            value = _bare_param_value(scan)
        if key in params:
            raise scan.fail(f"duplicate parameter '{key}'", col=key_col)
        params[key] = value
        scan.skip_ws()
        if scan.try_literal(","):
            continue
        scan.expect(")")
        return params


def _bare_param_value(scan: _Scan) -> str:
    """A bare parameter value: everything up to a comma or the closing paren
    at bracket depth zero."""
    start = scan.pos
    depth = 0
    while scan.pos < len(scan.text):
        ch = scan.text[scan.pos]
        if ch in "([":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == ")":
            if depth == 0:
                break
            depth -= 1
        elif ch == "," and depth == 0:
            break
        elif ch == '"':
            raise scan.fail("quote inside bare value; quote the whole value")
        scan.pos += 1
    value = scan.text[start:scan.pos].strip()
    if not value:
        raise scan.fail("empty parameter value", col=start + 1)
    return value


def _value_type(scan: _Scan) -> ValueType:
    col = scan.col
    name = scan.ident("value type")
    if name == "enum":
        scan.expect("(")
        values: list[str] = []
        while True:
            values.append(scan.name_token("enum value"))
            scan.skip_ws()
            if scan.try_literal(","):
                continue
            scan.expect(")")
            break
        return ValueType("enum", enum_values=tuple(values))
    if name == "elementRef":
        scan.expect("(")
        kind = scan.ident("element kind")
        scan.expect(")")
        return ValueType("elementRef", ref_kind=kind)
    if name in ("text", "number", "duration-seconds"):
        return ValueType(name)
    raise scan.fail(f"unknown value type '{name}'", col=col)


def _literal(scan: _Scan) -> AttrValue:
    """A default or attribute value: quoted string, or bare token coerced to
    int or float when it parses as one."""
    scan.skip_ws()
    if scan.peek_is_quote():
        return scan.quoted()
    start = scan.pos
    while scan.pos < len(scan.text) and re.match(r"[A-Za-z0-9_.+-]", scan.text[scan.pos]):
        scan.pos += 1
    token = scan.text[start:scan.pos]
    if not token:
        raise scan.fail("expected value")
    return _coerce(token)


def _coerce(token: str) -> AttrValue:
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


# ---------------------------------------------------------------------------
# Block parsing


def parse_block(text: str | bytes) -> BuildingBlock:
    """Parse one .dslbb document into a BuildingBlock.

    Raises ParseFailure with every collected error when the text is not
    well-formed. Static semantic checks live in core.check_block, not here.
    """
    text = _decode(text)
    errors: list[ParseError] = []
    lines = _lines(text)

    name: str | None = None
    extends: str | None = None
    elements: list[ElementKind] = []
    constraints: list[ConstraintSpec] = []
    steps: list[MethodStep] = []
    nuances: list[NuanceSpec] = []
    docs: list[DocEntry] = []
    # Attributes attach to the most recent element statement.
    pending_attrs: list[AttributeSpec] = []
    current: ElementKind | None = None

    def flush_element() -> None:
        nonlocal current
        if current is not None:
            elements.append(
                ElementKind(
                    current.name,
                    current.role,
                    tuple(pending_attrs),
                    current.source_kind,
                    current.target_kind,
                )
            )
            pending_attrs.clear()
            current = None

    if not lines:
        raise ParseFailure([ParseError(SourceSpan(1, 1), "expected 'block' header")])

    for line_no, line in lines:
        scan = _Scan(line, line_no)
        try:
            scan.skip_ws()
            col = scan.col
            keyword = scan.ident("statement keyword")
            if name is None and keyword != "block":
                errors.append(ParseError(SourceSpan(line_no, col), "expected 'block' header"))
                name = ""  # do not repeat the complaint on every following line
            if keyword == "block":
                if name:
                    raise scan.fail("duplicate 'block' header", col=col)
                name = scan.ident("block name")
                if scan.try_literal("extends"):
                    extends = scan.ident("parent block name")
                scan.end_of_line()
            elif keyword == "element":
                flush_element()
                role = scan.ident("role")
                el_name = scan.ident("element kind name")
                source = target = ""
                if scan.try_literal("from"):
                    source = scan.ident("source kind")
                    scan.expect("to")
                    target = scan.ident("target kind")
                scan.end_of_line()
                current = ElementKind(el_name, role, (), source, target)
            elif keyword == "attr":
                if current is None:
                    raise scan.fail("attribute outside an element statement", col=col)
                attr_name = scan.ident("attribute name")
                scan.expect(":")
                value_type = _value_type(scan)
                required = scan.try_literal("required")
                default: AttrValue | None = None
                if scan.try_literal("="):
                    default = _literal(scan)
                scan.end_of_line()
                pending_attrs.append(AttributeSpec(attr_name, value_type, required, default))
            elif keyword == "constraint":
                flush_element()
                cid = scan.ident("constraint id")
                ckind = scan.ident("constraint kind")
                params = _param_list(scan)
                scan.expect("severity")
                scan.expect("=")
                severity = scan.ident("severity")
                scan.expect("message")
                scan.expect("=")
                message = scan.quoted()
                scan.end_of_line()
                constraints.append(ConstraintSpec(cid, ckind, params, severity, message))
            elif keyword == "step":
                flush_element()
                sid = scan.ident("step id")
                title = scan.quoted()
                description = ""
                if scan.peek_is_quote():
                    description = scan.quoted()
                scan.expect("done-when")
                pkind = scan.ident("predicate kind")
                params = _param_list(scan)
                scan.end_of_line()
                steps.append(MethodStep(sid, title, description, PredicateSpec(pkind, params)))
            elif keyword == "nuance":
                flush_element()
                nid = scan.ident("nuance id")
                effect = scan.ident("nuance effect")
                params = _param_list(scan)
                scan.expect("reason")
                scan.expect("=")
                reason = scan.quoted()
                scan.end_of_line()
                nuances.append(NuanceSpec(nid, effect, params, reason))
            elif keyword == "doc":
                flush_element()
                element = scan.ident("element kind name")
                attribute: str | None = None
                if scan.try_literal("."):
                    attribute = scan.ident("attribute name")
                description = scan.quoted()
                scan.end_of_line()
                docs.append(DocEntry(element, attribute, description))
            else:
                raise scan.fail(f"unknown statement '{keyword}'", col=col)
        except _LineError as exc:
            errors.append(exc.error)

    flush_element()
    if errors:
        raise ParseFailure(errors)
    return BuildingBlock(
        name=name or "",
        extends=extends,
        elements=tuple(elements),
        constraints=tuple(constraints),
        method=MethodSpec(tuple(steps)),
        nuances=tuple(nuances),
        docs=tuple(docs),
    )


# ---------------------------------------------------------------------------
# Model parsing


def parse_model(text: str | bytes) -> Model:
    """Parse one .dslm document into a Model."""
    text = _decode(text)
    errors: list[ParseError] = []
    lines = _lines(text)

    if not lines:
        raise ParseFailure([ParseError(SourceSpan(1, 1), "expected 'model' header")])

    model_id = ""
    block_name = ""
    version = 1
    elements: list[ModelElement] = []
    seen: set[tuple[str, str]] = set()
    header_done = False

    for line_no, line in lines:
        scan = _Scan(line, line_no)
        try:
            scan.skip_ws()
            if not header_done:
                header_done = True
                col = scan.col
                if scan.ident("statement keyword") != "model":
                    raise scan.fail("expected 'model' header", col=col)
                model_id = scan.name_token("model id")
                scan.expect(":")
                block_name = scan.ident("block name")
                scan.expect("version")
                scan.skip_ws()
                vcol = scan.col
                vtoken = scan._token(re.compile(r"[0-9]+"), "version number")
                version = int(vtoken)
                if version < 1:
                    raise scan.fail("version must be at least 1", col=vcol)
                scan.end_of_line()
                continue
            element = _parse_model_element(scan)
            key = (element.kind, element.name)
            if key in seen:
                raise scan.fail(f"duplicate element [{element.kind}: {element.name}]", col=1)
            seen.add(key)
            elements.append(element)
        except _LineError as exc:
            errors.append(exc.error)

    if errors:
        raise ParseFailure(errors)
    return Model(id=model_id, block_name=block_name, elements=tuple(elements), version=version)


def _parse_model_element(scan: _Scan) -> ModelElement:
    scan.expect("[")
    kind = scan.ident("element kind")
    scan.expect(":")
    name = scan.name_token("element name")
    scan.expect("]")
    attrs: dict[str, AttrValue] = {}
    scan.skip_ws()
    if not scan.at_end() and scan.peek() != "{":
        source = scan.name_token("source element name")
        scan.expect("->")
        target = scan.name_token("target element name")
        attrs["source"] = source
        attrs["target"] = target
    if scan.try_literal("{"):
        scan.skip_ws()
        if not scan.try_literal("}"):
            while True:
                scan.skip_ws()
                key_col = scan.col
                key = scan.ident("attribute name")
                if key in RESERVED_ATTR_KEYS:
                    raise scan.fail(f"'{key}' cannot be set inside the attribute block", col=key_col)
                if key in attrs:
                    raise scan.fail(f"duplicate attribute '{key}'", col=key_col)
                scan.expect("=")
                attrs[key] = _literal(scan)
                scan.skip_ws()
                if scan.try_literal(","):
                    continue
                scan.expect("}")
                break
    scan.end_of_line()
    return ModelElement(name=name, kind=kind, attrs=attrs)


# ---------------------------------------------------------------------------
# Serialization


def _quote(s: str) -> str:
    return '"%s"' % "".join(_UNESCAPES.get(ch, ch) for ch in s)


def _format_param_value(value: str) -> str:
    if _BARE_PARAM_RE.match(value) or _SELECTOR_PARAM_RE.match(value):
        return value
    return _quote(value)


def _format_params(params) -> str:
    return ", ".join(f"{k}={_format_param_value(v)}" for k, v in params.items())


def _format_literal(value: AttrValue) -> str:
    if isinstance(value, bool):
        raise ValueError("boolean attribute values are not supported")
    if isinstance(value, (int, float)):
        return repr(value)
    if _BARE_VALUE_RE.match(value) and not _is_numeric(value):
        return value
    return _quote(value)


def _is_numeric(token: str) -> bool:
    return not isinstance(_coerce(token), str)


def _format_name(name: str) -> str:
    return name if _NAME_RE.fullmatch(name) else _quote(name)


def serialize_block(block: BuildingBlock) -> str:
    """Render a block in canonical .dslbb form."""
    header = f"block {block.name}"
    if block.extends:
        header += f" extends {block.extends}"
    sections: list[list[str]] = [[header]]

    if block.elements:
        section = []
        for el in block.elements:
            line = f"element {el.role} {el.name}"
            if el.source_kind or el.target_kind:
                line += f" from {el.source_kind} to {el.target_kind}"
            section.append(line)
            for spec in el.attributes:
                attr_line = f"  attr {spec.name}: {spec.value_type.render()}"
                if spec.required:
                    attr_line += " required"
                if spec.default is not None:
                    attr_line += f" = {_format_literal(spec.default)}"
                section.append(attr_line)
        sections.append(section)

    if block.constraints:
        sections.append(
            [
                f"constraint {c.id} {c.kind}({_format_params(c.params)})"
                f" severity={c.severity} message={_quote(c.message)}"
                for c in block.constraints
            ]
        )

    if block.method.steps:
        section = []
        for step in block.method.steps:
            line = f"step {step.id} {_quote(step.title)}"
            if step.description:
                line += f" {_quote(step.description)}"
            line += f" done-when {step.completion.kind}({_format_params(step.completion.params)})"
            section.append(line)
        sections.append(section)

    if block.nuances:
        sections.append(
            [
                f"nuance {n.id} {n.effect}({_format_params(n.params)}) reason={_quote(n.reason)}"
                for n in block.nuances
            ]
        )

    if block.docs:
        section = []
        for entry in block.docs:
            subject = entry.element if entry.attribute is None else f"{entry.element}.{entry.attribute}"
            section.append(f"doc {subject} {_quote(entry.description)}")
        sections.append(section)

    return "\n\n".join("\n".join(section) for section in sections) + "\n"


def serialize_model(model: Model) -> str:
    """Render a model in canonical .dslm form; element order is preserved."""
    lines = [f"model {_format_name(model.id)} : {model.block_name} version {model.version}"]
    for el in model.elements:
        line = f"[{el.kind}: {_format_name(el.name)}]"
        attrs = dict(el.attrs)
        source = attrs.pop("source", None)
        target = attrs.pop("target", None)
        if source is not None and target is not None:
            line += f" {_format_name(str(source))} -> {_format_name(str(target))}"
        if attrs:
            body = ", ".join(f"{k} = {_format_literal(v)}" for k, v in attrs.items())
            line += " { %s }" % body
        lines.append(line)
    return "\n".join(lines) + "\n"
