/** Small DOM helpers; enough that pages stay readable without a framework. */

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function labeled(text: string, control: HTMLElement): HTMLLabelElement {
  return el("label", { class: "field" }, [el("span", {}, [text]), control]);
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function option(value: string, text: string): HTMLOptionElement {
  return el("option", { value }, [text]);
}
