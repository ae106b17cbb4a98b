/**
 * Minimal XML parser for the documents the service emits (SVG plans, X3D
 * scenes). Produces a plain element tree with parent links so callers can
 * walk upward, which is how plan click resolution finds the owning layer.
 *
 * Namespace prefixes are kept as written; lookups use the local name.
 */

export interface XmlElement {
  tag: string;
  attrs: { [name: string]: string };
  children: XmlElement[];
  text: string;
  parent: XmlElement | null;
}

export class XmlParseError extends Error {}

const NAMED_ENTITIES: { [name: string]: string } = {
  amp: "&",
  lt: "<",
  gt: ">",
  quot: '"',
  apos: "'",
};

export function decodeEntities(raw: string): string {
  return raw.replace(/&(#x?[0-9a-fA-F]+|[a-zA-Z]+);/g, (_whole, body: string) => {
    if (body.startsWith("#x") || body.startsWith("#X")) {
      return String.fromCodePoint(parseInt(body.slice(2), 16));
    }
    if (body.startsWith("#")) {
      return String.fromCodePoint(parseInt(body.slice(1), 10));
    }
    const named = NAMED_ENTITIES[body];
    if (named === undefined) throw new XmlParseError(`unknown entity &${body};`);
    return named;
  });
}

export function localName(tag: string): string {
  const colon = tag.lastIndexOf(":");
  return colon < 0 ? tag : tag.slice(colon + 1);
}

class Scanner {
  readonly source: string;
  pos = 0;

  constructor(source: string) {
    this.source = source;
  }

  get done(): boolean {
    return this.pos >= this.source.length;
  }

  peek(offset = 0): string {
    return this.source[this.pos + offset] ?? "";
  }

  startsWith(text: string): boolean {
    return this.source.startsWith(text, this.pos);
  }

  skipUntil(marker: string): void {
    const at = this.source.indexOf(marker, this.pos);
    if (at < 0) throw new XmlParseError(`unterminated construct, expected ${marker}`);
    this.pos = at + marker.length;
  }

  skipWhitespace(): void {
    while (!this.done && /\s/.test(this.peek())) this.pos += 1;
  }

  readName(): string {
    const start = this.pos;
    while (!this.done && /[^\s=/>]/.test(this.peek())) this.pos += 1;
    if (this.pos === start) throw new XmlParseError(`expected a name at offset ${start}`);
    return this.source.slice(start, this.pos);
  }

  readQuoted(): string {
    const quote = this.peek();
    if (quote !== '"' && quote !== "'") {
      throw new XmlParseError(`expected a quoted value at offset ${this.pos}`);
    }
    const end = this.source.indexOf(quote, this.pos + 1);
    if (end < 0) throw new XmlParseError("unterminated attribute value");
    const raw = this.source.slice(this.pos + 1, end);
    this.pos = end + 1;
    return decodeEntities(raw);
  }

  expect(text: string): void {
    if (!this.startsWith(text)) {
      throw new XmlParseError(`expected ${JSON.stringify(text)} at offset ${this.pos}`);
    }
    this.pos += text.length;
  }
}

function parseAttributes(scanner: Scanner): { [name: string]: string } {
  const attrs: { [name: string]: string } = {};
  for (;;) {
    scanner.skipWhitespace();
    if (scanner.peek() === ">" || scanner.peek() === "/" || scanner.done) return attrs;
    const name = scanner.readName();
    scanner.skipWhitespace();
    scanner.expect("=");
    scanner.skipWhitespace();
    attrs[name] = scanner.readQuoted();
  }
}

export function parseXml(source: string): XmlElement {
  const scanner = new Scanner(source);
  let root: XmlElement | null = null;
  const stack: XmlElement[] = [];
  let pendingText = "";

  const flushText = () => {
    if (stack.length > 0 && pendingText) {
      stack[stack.length - 1].text += decodeEntities(pendingText);
    }
    pendingText = "";
  };

  while (!scanner.done) {
    if (scanner.peek() !== "<") {
      pendingText += scanner.peek();
      scanner.pos += 1;
      continue;
    }
    if (scanner.startsWith("<?")) {
      scanner.skipUntil("?>");
      continue;
    }
    if (scanner.startsWith("<!--")) {
      scanner.skipUntil("-->");
      continue;
    }
    if (scanner.startsWith("<![CDATA[")) {
      const start = scanner.pos + "<![CDATA[".length;
      scanner.skipUntil("]]>");
      pendingText += scanner.source.slice(start, scanner.pos - "]]>".length);
      continue;
    }
    if (scanner.startsWith("<!")) {
      scanner.skipUntil(">");
      continue;
    }
    if (scanner.startsWith("</")) {
      flushText();
      scanner.pos += 2;
      const name = scanner.readName();
      scanner.skipWhitespace();
      scanner.expect(">");
      const open = stack.pop();
      if (!open || open.tag !== name) {
        throw new XmlParseError(`mismatched closing tag </${name}>`);
      }
      continue;
    }

    flushText();
    scanner.pos += 1;
    const tag = scanner.readName();
    const attrs = parseAttributes(scanner);
    const parent = stack.length > 0 ? stack[stack.length - 1] : null;
    const element: XmlElement = { tag, attrs, children: [], text: "", parent };
    if (parent) {
      parent.children.push(element);
    } else if (root) {
      throw new XmlParseError("multiple root elements");
    } else {
      root = element;
    }
    if (scanner.startsWith("/>")) {
      scanner.pos += 2;
      continue;
    }
    scanner.expect(">");
    stack.push(element);
  }

  if (stack.length > 0) throw new XmlParseError(`unclosed element <${stack[stack.length - 1].tag}>`);
  if (!root) throw new XmlParseError("no root element");
  return root;
}

/** Depth-first walk over an element and all descendants. */
export function* walk(element: XmlElement): Generator<XmlElement> {
  yield element;
  for (const child of element.children) yield* walk(child);
}

export function findAll(
  element: XmlElement,
  predicate: (el: XmlElement) => boolean,
): XmlElement[] {
  const out: XmlElement[] = [];
  for (const el of walk(element)) if (predicate(el)) out.push(el);
  return out;
}

export function byLocalName(element: XmlElement, name: string): XmlElement[] {
  return findAll(element, (el) => localName(el.tag) === name);
}
