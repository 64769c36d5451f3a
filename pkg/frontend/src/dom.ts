/** Tiny DOM construction helper; keeps the views dependency-free. */

export interface ElProps {
  className?: string;
  text?: string;
  testid?: string;
  attrs?: Record<string, string>;
  onClick?: (event: Event) => void;
  onChange?: (event: Event) => void;
}

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  props: ElProps = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (props.className) node.className = props.className;
  if (props.text !== undefined) node.textContent = props.text;
  if (props.testid) node.setAttribute("data-testid", props.testid);
  if (props.attrs)
    for (const [key, value] of Object.entries(props.attrs))
      node.setAttribute(key, value);
  if (props.onClick) node.addEventListener("click", props.onClick);
  if (props.onChange) node.addEventListener("change", props.onChange);
  for (const child of children)
    node.append(typeof child === "string" ? document.createTextNode(child) : child);
  return node;
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl(
  tag: string,
  attrs: Record<string, string> = {},
  children: Element[] = [],
): Element {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs))
    node.setAttribute(key, value);
  for (const child of children) node.append(child);
  return node;
}
