/** Linear and log10 axis scales with tick generation. */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
  ticks(): number[];
  log: boolean;
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const exp = Math.floor(Math.log10(a));
    const mant = v / 10 ** exp;
    const m = Number(mant.toPrecision(3));
    return m === 1 ? `1E${exp}` : `${m}E${exp}`;
  }
  return String(Number(v.toPrecision(4)));
}

function niceStep(span: number): number {
  const raw = span / 5;
  const mag = 10 ** Math.floor(Math.log10(raw));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const f = ((v: number) =>
    range[0] + ((v - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.range = range;
  f.log = false;
  f.ticks = () => {
    const step = niceStep(d1 - d0);
    const out: number[] = [];
    for (let t = Math.ceil(d0 / step) * step; t <= d1 + 1e-12 * step; t += step) {
      out.push(Math.abs(t) < 1e-12 * step ? 0 : t);
    }
    return out;
  };
  return f;
}

export function logScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  if (domain[0] <= 0 || domain[1] <= 0) {
    throw new Error("log scale needs positive bounds");
  }
  let [l0, l1] = [Math.log10(domain[0]), Math.log10(domain[1])];
  if (l0 === l1) {
    l0 -= 0.5;
    l1 += 0.5;
  }
  const f = ((v: number) =>
    range[0] + ((Math.log10(v) - l0) / (l1 - l0)) * (range[1] - range[0])) as Scale;
  f.domain = [10 ** l0, 10 ** l1];
  f.range = range;
  f.log = true;
  f.ticks = () => {
    const out: number[] = [];
    const step = Math.max(1, Math.ceil((l1 - l0) / 6));
    for (let e = Math.ceil(l0 - 1e-12); e <= l1 + 1e-12; e += step) {
      out.push(10 ** e);
    }
    return out;
  };
  return f;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo)) throw new Error("no finite values to scale");
  return [lo, hi];
}

export function padded(e: [number, number], frac = 0.05): [number, number] {
  const span = e[1] - e[0] || Math.abs(e[0]) || 1;
  return [e[0] - frac * span, e[1] + frac * span];
}
