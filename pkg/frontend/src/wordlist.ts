// Same list the server suggests from. A suggestion drawn here never
// leaves the browser; only the final passphrase is submitted.

export const WORDS: readonly string[] = [
  "acorn", "amber", "anchor", "anvil", "apron", "arrow", "aspen", "autumn",
  "badge", "bamboo", "banjo", "barley", "basket", "beacon", "bellow", "birch",
  "bishop", "blanket", "bonfire", "border", "bottle", "boulder", "bramble", "brass",
  "breeze", "brick", "bridge", "bronze", "brook", "bucket", "burrow", "butter",
  "cabin", "camera", "candle", "canoe", "canyon", "carpet", "cedar", "cellar",
  "chalk", "chapel", "cherry", "chisel", "cinder", "circle", "citrus", "clover",
  "cobalt", "comet", "copper", "coral", "cotton", "cradle", "crater", "crimson",
  "crystal", "cypress", "daisy", "dapple", "desert", "drift", "dusk", "ember",
  "engine", "falcon", "feather", "fern", "field", "flint", "forest", "fountain",
  "fox", "garnet", "geyser", "ginger", "glacier", "goblet", "granite", "grove",
  "hammock", "harbor", "hazel", "heather", "hollow", "horizon", "index", "iris",
  "island", "ivory", "jasper", "juniper", "kettle", "lagoon", "lantern", "larch",
  "ledge", "lilac", "linen", "lumen", "magnet", "mantle", "maple", "marble",
  "meadow", "mirror", "morning", "moss", "mountain", "nectar", "north", "oak",
  "ocean", "olive", "onyx", "orchard", "otter", "paddle", "parchment", "pebble",
  "pepper", "pine", "pistachio", "plume", "pond", "poplar", "prairie", "quarry",
  "quill", "rain", "raven", "reef", "ridge", "river", "rope", "rust",
  "saddle", "saffron", "sage", "sandal", "shore", "silver", "slate", "snow",
  "sparrow", "spruce", "stone", "summit", "thistle", "timber", "tulip", "twilight",
  "valley", "velvet", "walnut", "willow", "winter", "zephyr",
];

function randomIndex(n: number): number {
  // rejection sampling keeps the draw uniform
  const limit = Math.floor(0x100000000 / n) * n;
  const buf = new Uint32Array(1);
  do {
    crypto.getRandomValues(buf);
  } while (buf[0] >= limit);
  return buf[0] % n;
}

/** Two independent draws. Pass an rng only in tests. */
export function suggestPhrase(rng?: () => number): string {
  const pick = rng
    ? () => WORDS[Math.floor(rng() * WORDS.length)]
    : () => WORDS[randomIndex(WORDS.length)];
  return `${pick()} ${pick()}`;
}
