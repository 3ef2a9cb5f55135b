/** Small helpers for building DOM trees without a framework. */

export interface Attrs {
    [name: string]: string;
}

/**
 * Create an element with attributes and children. String children become
 * text nodes, so untrusted content (chart source, server messages) is never
 * parsed as markup.
 */
export function el<K extends keyof HTMLElementTagNameMap>(
    doc: Document,
    tag: K,
    attrs: Attrs = {},
    children: Array<Node | string> = [],
): HTMLElementTagNameMap[K] {
    const node = doc.createElement(tag);
    for (const [name, value] of Object.entries(attrs)) {
        node.setAttribute(name, value);
    }
    for (const child of children) {
        node.append(
            typeof child === "string" ? doc.createTextNode(child) : child,
        );
    }
    return node;
}

/** Remove all children from a node. */
export function clear(node: Element): void {
    while (node.firstChild) {
        node.removeChild(node.firstChild);
    }
}
