/** Reviewer queue: lowest-confidence notices first, as served by the API.
 *
 * Feedback is optimistic: the row disappears on click and comes back with
 * an error badge if the POST fails. The queue is reconciled against the
 * server on every poll, so a successful action stays gone.
 */

import type { ApiClient, FeedbackAction, NoticeLabel, ViewNotice } from "./api.js";

const LABELS: NoticeLabel[] = ["Mandatory", "Voluntary", "NotNotice"];

export class ReviewQueueView {
  private root: HTMLElement;
  private api: ApiClient;
  private onChange: () => void;
  private notices: ViewNotice[] = [];
  private errors = new Map<string, string>();

  constructor(root: HTMLElement, api: ApiClient, onChange: () => void) {
    this.root = root;
    this.api = api;
    this.onChange = onChange;
  }

  /** Replace queue contents with the server's current ordering. */
  setNotices(notices: ViewNotice[]): void {
    this.notices = [...notices];
    const ids = new Set(notices.map((n) => n.id));
    for (const id of [...this.errors.keys()]) {
      if (!ids.has(id)) this.errors.delete(id);
    }
    this.renderList();
  }

  private renderList(): void {
    const doc = this.root.ownerDocument;
    this.root.replaceChildren();

    if (this.notices.length === 0) {
      const empty = doc.createElement("p");
      empty.className = "queue-empty";
      empty.textContent = "Review queue is empty";
      this.root.append(empty);
      return;
    }

    const list = doc.createElement("ul");
    list.className = "review-queue";
    for (const notice of this.notices) {
      list.append(this.renderItem(notice));
    }
    this.root.append(list);
  }

  private renderItem(notice: ViewNotice): HTMLLIElement {
    const doc = this.root.ownerDocument;
    const item = doc.createElement("li");
    item.className = "queue-item";
    item.dataset.noticeId = notice.id;

    const header = doc.createElement("div");
    header.className = "queue-item-header";
    const badge = doc.createElement("span");
    badge.className = "label-badge";
    badge.style.backgroundColor = notice.color;
    badge.textContent = notice.label;
    const confidence = doc.createElement("span");
    confidence.className = "queue-confidence";
    confidence.textContent = Math.max(...notice.distribution).toFixed(3);
    header.append(badge, confidence);

    const text = doc.createElement("p");
    text.className = "queue-text";
    text.textContent = notice.text;

    const controls = doc.createElement("div");
    controls.className = "queue-controls";

    const confirm = doc.createElement("button");
    confirm.className = "btn-confirm";
    confirm.textContent = "Confirm";
    confirm.addEventListener("click", () => void this.submit(notice, "Confirm"));

    const select = doc.createElement("select");
    select.className = "correct-label";
    for (const label of LABELS) {
      if (label === notice.label) continue;
      const option = doc.createElement("option");
      option.value = label;
      option.textContent = label;
      select.append(option);
    }

    const correct = doc.createElement("button");
    correct.className = "btn-correct";
    correct.textContent = "Correct";
    correct.addEventListener("click", () =>
      void this.submit(notice, "Correct", select.value as NoticeLabel),
    );

    const reject = doc.createElement("button");
    reject.className = "btn-reject";
    reject.textContent = "Reject";
    reject.addEventListener("click", () => void this.submit(notice, "Reject"));

    controls.append(confirm, select, correct, reject);
    item.append(header, text, controls);

    const error = this.errors.get(notice.id);
    if (error !== undefined) {
      const errorBadge = doc.createElement("span");
      errorBadge.className = "error-badge";
      errorBadge.textContent = error;
      item.append(errorBadge);
    }
    return item;
  }

  private async submit(
    notice: ViewNotice,
    action: FeedbackAction,
    correctedLabel?: NoticeLabel,
  ): Promise<void> {
    // Optimistic removal; a failed POST puts the row back where it was,
    // with an error badge.
    const index = this.notices.findIndex((n) => n.id === notice.id);
    if (index < 0) return;
    this.notices.splice(index, 1);
    this.errors.delete(notice.id);
    this.renderList();
    try {
      await this.api.feedback(notice.id, action, correctedLabel);
    } catch (err) {
      this.notices.splice(Math.min(index, this.notices.length), 0, notice);
      this.errors.set(notice.id, err instanceof Error ? err.message : String(err));
      this.renderList();
      return;
    }
    this.onChange();
  }
}
