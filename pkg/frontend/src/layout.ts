/** Deterministic force-directed layout: a seeded PRNG plus a fixed number
 * of spring/repulsion iterations, so identical graphs always land on
 * identical coordinates (required for snapshot tests). */

export interface Point {
  x: number;
  y: number;
}

export interface LayoutOptions {
  width?: number;
  height?: number;
  iterations?: number;
  seed?: number;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function forceLayout(
  nodeIds: string[],
  edges: [string, string][],
  options: LayoutOptions = {},
): Map<string, Point> {
  const { width = 640, height = 480, iterations = 120, seed = 42 } = options;
  const ids = [...nodeIds].sort();
  const rand = mulberry32(seed);
  const positions = new Map<string, Point>();
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) / 3;
  ids.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(ids.length, 1);
    positions.set(id, {
      x: cx + radius * Math.cos(angle) + (rand() - 0.5) * 10,
      y: cy + radius * Math.sin(angle) + (rand() - 0.5) * 10,
    });
  });

  const index = new Map(ids.map((id, i) => [id, i] as const));
  const springs = edges
    .filter(([a, b]) => index.has(a) && index.has(b))
    .map(([a, b]) => [a, b] as const);
  const repulsion = 2200;
  const springLength = 110;
  const springK = 0.04;

  for (let step = 0; step < iterations; step++) {
    const force = new Map<string, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = positions.get(ids[i])!;
        const b = positions.get(ids[j])!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 1);
        const push = repulsion / d2;
        const d = Math.sqrt(d2);
        const fa = force.get(ids[i])!;
        const fb = force.get(ids[j])!;
        fa.x += (dx / d) * push;
        fa.y += (dy / d) * push;
        fb.x -= (dx / d) * push;
        fb.y -= (dy / d) * push;
      }
    }
    for (const [a, b] of springs) {
      const pa = positions.get(a)!;
      const pb = positions.get(b)!;
      const dx = pb.x - pa.x;
      const dy = pb.y - pa.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const pull = springK * (d - springLength);
      const fa = force.get(a)!;
      const fb = force.get(b)!;
      fa.x += (dx / d) * pull;
      fa.y += (dy / d) * pull;
      fb.x -= (dx / d) * pull;
      fb.y -= (dy / d) * pull;
    }
    const cooling = 1 - step / iterations;
    for (const id of ids) {
      const p = positions.get(id)!;
      const f = force.get(id)!;
      // gentle centering keeps disconnected nodes on screen
      f.x += (cx - p.x) * 0.01;
      f.y += (cy - p.y) * 0.01;
      p.x += Math.max(-12, Math.min(12, f.x)) * cooling;
      p.y += Math.max(-12, Math.min(12, f.y)) * cooling;
      p.x = Math.min(width - 20, Math.max(20, p.x));
      p.y = Math.min(height - 20, Math.max(20, p.y));
    }
  }
  for (const p of positions.values()) {
    p.x = Math.round(p.x * 100) / 100;
    p.y = Math.round(p.y * 100) / 100;
  }
  return positions;
}
