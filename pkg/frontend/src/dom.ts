// Just enough sugar over createElement to keep the views readable.

type Child = Node | string;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "text") node.textContent = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Status line helper; kind picks the style. */
export function notice(
  target: HTMLElement,
  kind: "ok" | "warn" | "error",
  text: string,
): void {
  clear(target);
  target.append(el("p", { class: `notice ${kind}`, text }));
}
