import { describe, expect, it } from "vitest";

import { composePayload, draftComplete, emptyDraft, toggleSecured } from "../src/composer.js";

describe("composer draft", () => {
  const draft = {
    memberA: { island: 2, nsId: "svc-a" },
    memberB: { island: 4, nsId: "svc-b" },
    secured: false,
    wavelengthHint: null,
  };

  it("builds the compose body from the picks", () => {
    expect(composePayload(draft)).toEqual({
      members: [
        [2, "svc-a"],
        [4, "svc-b"],
      ],
      secured: false,
    });
  });

  it("security toggle changes only the secured flag", () => {
    const before = composePayload(draft);
    const after = composePayload(toggleSecured(draft));
    expect(after.secured).toBe(true);
    expect({ ...after, secured: false }).toEqual(before);
  });

  it("incomplete drafts cannot compose", () => {
    expect(draftComplete(emptyDraft())).toBe(false);
    expect(() => composePayload(emptyDraft())).toThrow(/two different islands/);
    const samePair = { ...draft, memberB: { island: 2, nsId: "svc-b" } };
    expect(draftComplete(samePair)).toBe(false);
  });

  it("wavelength pin rides along when set", () => {
    const pinned = { ...draft, wavelengthHint: 195.3 };
    expect(composePayload(pinned).wavelength_hint_thz).toBe(195.3);
  });
});
