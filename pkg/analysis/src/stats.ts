/** Ordinary least squares on transformed axes with bootstrap intervals —
 * the only statistics the figure layer performs. */

export interface FitResult {
  slope: number;
  intercept: number;
  slopeCi: [number, number];
  r2: number;
}

export function ols(x: number[], y: number[]): { slope: number; intercept: number; r2: number } {
  const n = x.length;
  if (n < 2) throw new Error("need at least two points to fit");
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - mx) ** 2;
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) ** 2;
  }
  if (sxx === 0) throw new Error("degenerate abscissa");
  const slope = sxy / sxx;
  const intercept = my - slope * mx;
  let rss = 0;
  for (let i = 0; i < n; i++) rss += (y[i] - intercept - slope * x[i]) ** 2;
  const r2 = syy === 0 ? 1 : 1 - rss / syy;
  return { slope, intercept, r2 };
}

/** Deterministic xorshift generator so bootstrap intervals reproduce. */
export function makeRng(seed: number): () => number {
  let s = seed >>> 0 || 0x9e3779b9;
  return () => {
    s ^= s << 13;
    s >>>= 0;
    s ^= s >> 17;
    s ^= s << 5;
    s >>>= 0;
    return s / 0x100000000;
  };
}

/** Residual-resampling bootstrap CI for the OLS slope (95 percent). */
export function fitWithBootstrap(x: number[], y: number[], nBoot = 500, seed = 12345): FitResult {
  const base = ols(x, y);
  const resid = y.map((v, i) => v - base.intercept - base.slope * x[i]);
  const rng = makeRng(seed);
  const slopes: number[] = [];
  for (let b = 0; b < nBoot; b++) {
    const yb = x.map((xi, i) => base.intercept + base.slope * xi + resid[Math.floor(rng() * resid.length)]);
    slopes.push(ols(x, yb).slope);
  }
  slopes.sort((a, c) => a - c);
  const lo = slopes[Math.floor(0.025 * nBoot)];
  const hi = slopes[Math.min(nBoot - 1, Math.floor(0.975 * nBoot))];
  return { ...base, slopeCi: [lo, hi] };
}

export function median(values: number[]): number {
  if (values.length === 0) throw new Error("median of nothing");
  const v = [...values].sort((a, b) => a - b);
  const mid = Math.floor(v.length / 2);
  return v.length % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

export function bootstrapMedianCi(values: number[], nBoot = 400, seed = 7): [number, number] {
  const rng = makeRng(seed);
  const meds: number[] = [];
  for (let b = 0; b < nBoot; b++) {
    const sample = values.map(() => values[Math.floor(rng() * values.length)]);
    meds.push(median(sample));
  }
  meds.sort((a, b) => a - b);
  return [meds[Math.floor(0.025 * nBoot)], meds[Math.min(nBoot - 1, Math.floor(0.975 * nBoot))]];
}

/** Standard normal quantile (Acklam's rational approximation). */
export function normalQuantile(p: number): number {
  if (p <= 0 || p >= 1) throw new Error("quantile needs p in (0,1)");
  const a = [-39.6968302866538, 220.946098424521, -275.928510446969, 138.357751867269, -30.6647980661472, 2.50662827745924];
  const b = [-54.4760987982241, 161.585836858041, -155.698979859887, 66.8013118877197, -13.2806815528857];
  const c = [-0.00778489400243029, -0.322396458041136, -2.40075827716184, -2.54973253934373, 4.37466414146497, 2.93816398269878];
  const d = [0.00778469570904146, 0.32246712907004, 2.445134137143, 3.75440866190742];
  const pl = 0.02425;
  let q: number;
  let r: number;
  if (p < pl) {
    q = Math.sqrt(-2 * Math.log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
      ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p <= 1 - pl) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
      (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  q = Math.sqrt(-2 * Math.log(1 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
    ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}
