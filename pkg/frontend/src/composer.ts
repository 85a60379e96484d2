/** Draft state for composing one inter-island service. */

export interface MemberPick {
  island: number;
  nsId: string;
}

export interface Draft {
  memberA: MemberPick | null;
  memberB: MemberPick | null;
  secured: boolean;
  wavelengthHint: number | null;
}

export function emptyDraft(): Draft {
  return { memberA: null, memberB: null, secured: false, wavelengthHint: null };
}

export function toggleSecured(draft: Draft): Draft {
  return { ...draft, secured: !draft.secured };
}

export function draftComplete(draft: Draft): boolean {
  return (
    draft.memberA !== null &&
    draft.memberB !== null &&
    draft.memberA.island !== draft.memberB.island
  );
}

export interface ComposePayload {
  members: [number, string][];
  secured: boolean;
  wavelength_hint_thz?: number;
}

/** The compose request body; the security toggle only moves `secured`. */
export function composePayload(draft: Draft): ComposePayload {
  if (!draftComplete(draft)) {
    throw new Error("pick one service on each of two different islands");
  }
  const payload: ComposePayload = {
    members: [
      [draft.memberA!.island, draft.memberA!.nsId],
      [draft.memberB!.island, draft.memberB!.nsId],
    ],
    secured: draft.secured,
  };
  if (draft.wavelengthHint !== null) {
    payload.wavelength_hint_thz = draft.wavelengthHint;
  }
  return payload;
}
