/** Minimal toast stack for edit feedback ("split: vessels separated"). */

export class ToastHost {
  private readonly root: HTMLElement;
  private readonly ttlMs: number;

  constructor(root: HTMLElement, ttlMs = 4000) {
    this.root = root;
    this.ttlMs = ttlMs;
  }

  show(message: string, kind: "info" | "error" = "info"): HTMLElement {
    const el = document.createElement("div");
    el.className = `toast toast-${kind}`;
    el.textContent = message;
    this.root.appendChild(el);
    setTimeout(() => el.remove(), this.ttlMs);
    return el;
  }
}
