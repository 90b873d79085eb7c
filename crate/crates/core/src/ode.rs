//! Dormand–Prince 8(5,3) integrator with 7th-order continuous output.
//!
//! Only what the Riccati solver needs: fixed-size states, per-component
//! tolerances, and one [`DenseSegment`] per accepted step so the solution
//! can be evaluated (and differentiated) anywhere inside the span.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl<const N: usize> {
    pub rtol: [f64; N],
    pub atol: [f64; N],
    pub max_step: f64,
    pub max_steps: usize,
}

/// Continuous extension of one accepted step from `x0` to `x0 + h`.
#[derive(Debug, Clone, Copy)]
pub struct DenseSegment<const N: usize> {
    pub x0: f64,
    pub h: f64,
    coeffs: [[f64; N]; 8],
}

impl<const N: usize> DenseSegment<N> {
    pub fn lo(&self) -> f64 {
        self.x0.min(self.x0 + self.h)
    }

    pub fn hi(&self) -> f64 {
        self.x0.max(self.x0 + self.h)
    }

    pub fn start(&self) -> [f64; N] {
        self.coeffs[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = self.coeffs[0];
        for (yi, di) in y.iter_mut().zip(self.coeffs[1].iter()) {
            *yi += di;
        }
        y
    }

    /// Value and x-derivative of the interpolant at `x`.
    pub fn eval(&self, x: f64) -> ([f64; N], [f64; N]) {
        let t = (x - self.x0) / self.h;
        let t1 = 1.0 - t;
        let c = &self.coeffs;
        let mut y = [0.0; N];
        let mut dy = [0.0; N];
        for i in 0..N {
            // nested form r0 + t(r1 + t1(r2 + t(r3 + t1(r4 + t(r5 + t1(r6 + t r7))))))
            let q7 = c[6][i] + t * c[7][i];
            let d7 = c[7][i];
            let q6 = c[5][i] + t1 * q7;
            let d6 = -q7 + t1 * d7;
            let q5 = c[4][i] + t * q6;
            let d5 = q6 + t * d6;
            let q4 = c[3][i] + t1 * q5;
            let d4 = -q5 + t1 * d5;
            let q3 = c[2][i] + t * q4;
            let d3 = q4 + t * d4;
            let q2 = c[1][i] + t1 * q3;
            let d2 = -q3 + t1 * d3;
            y[i] = c[0][i] + t * q2;
            dy[i] = (q2 + t * d2) / self.h;
        }
        (y, dy)
    }
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction), appending
/// one dense segment per accepted step. Returns the end state and the last
/// proposed step size, which callers can reuse to continue on the next piece.
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    x1: f64,
    y0: [f64; N],
    h_guess: Option<f64>,
    control: &StepControl<N>,
    out: &mut Vec<DenseSegment<N>>,
) -> Result<([f64; N], f64)>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok((y0, h_guess.unwrap_or(control.max_step)));
    }
    let dir = span.signum();
    let max_step = control.max_step.min(span.abs());
    let mut h = h_guess
        .map(f64::abs)
        .unwrap_or(0.05 * max_step)
        .min(max_step)
        .max(1e-12 * span.abs())
        * dir;

    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y)?;
    let mut rejected_last = false;
    let mut steps = 0usize;

    loop {
        if steps >= control.max_steps {
            return Err(Error::Integration {
                x,
                reason: format!("step budget of {} exhausted", control.max_steps),
            });
        }
        if h.abs() <= 1e-14 * x.abs().max(1.0) {
            return Err(Error::Integration {
                x,
                reason: "step size underflow".into(),
            });
        }
        let mut last = false;
        if (x + 1.01 * h - x1) * dir >= 0.0 {
            h = x1 - x;
            last = true;
        }
        steps += 1;

        let stages = eight_stages(&f, x, &y, &k1, h)?;
        let (y_new, err) = error_norm(&y, &stages, h, control);

        if err <= 1.0 {
            let k_new = f(x + h, &y_new)?;
            let coeffs = dense_coefficients(&f, x, &y, &y_new, &stages, &k_new, h)?;
            out.push(DenseSegment { x0: x, h, coeffs });

            let mut fac = 0.9 * err.max(1e-16).powf(-1.0 / 8.0);
            fac = fac.clamp(0.333, 6.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            rejected_last = false;

            x = if last { x1 } else { x + h };
            y = y_new;
            k1 = k_new;
            if last {
                return Ok((y, (h * fac).abs().min(control.max_step)));
            }
            h = (h * fac).abs().min(max_step) * dir;
        } else {
            let fac = (0.9 * err.powf(-1.0 / 8.0)).max(0.2);
            h *= fac;
            rejected_last = true;
        }
    }
}

/// The twelve stages of one step; index 0 is `f(x, y)`.
struct Stages<const N: usize> {
    k: [[f64; N]; 12],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

fn eight_stages<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<Stages<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 12];
    k[0] = *k1;
    for s in 1..12 {
        let row = A[s - 1];
        let mut yi = *y;
        for i in 0..N {
            let mut acc = 0.0;
            for (j, a) in row.iter().enumerate().take(s) {
                acc += a * k[j][i];
            }
            yi[i] += h * acc;
        }
        k[s] = f(x + C[s] * h, &yi)?;
    }
    Ok(Stages { k })
}

fn error_norm<const N: usize>(
    y: &[f64; N],
    st: &Stages<N>,
    h: f64,
    control: &StepControl<N>,
) -> ([f64; N], f64) {
    let k = &st.k;
    let mut y_new = *y;
    let mut err = 0.0;
    let mut err2 = 0.0;
    for i in 0..N {
        let mut bsum = 0.0;
        let mut e = 0.0;
        for s in 0..12 {
            bsum += B[s] * k[s][i];
            e += E[s] * k[s][i];
        }
        y_new[i] += h * bsum;
        let bhh = bsum - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
        let sc = control.atol[i] + control.rtol[i] * y[i].abs().max(y_new[i].abs());
        err += (e / sc) * (e / sc);
        err2 += (bhh / sc) * (bhh / sc);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let norm = h.abs() * err * (1.0 / (N as f64 * deno)).sqrt();
    (y_new, norm)
}

fn dense_coefficients<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    y_new: &[f64; N],
    st: &Stages<N>,
    k_new: &[f64; N],
    h: f64,
) -> Result<[[f64; N]; 8]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k = &st.k;
    // stages 14..16 of the continuous extension; index 12 is f(x + h, y_new)
    let k14 = f(
        x + C14 * h,
        &axpy(
            y,
            h,
            &[
                (A14[0], &k[0]),
                (A14[6], &k[6]),
                (A14[7], &k[7]),
                (A14[8], &k[8]),
                (A14[9], &k[9]),
                (A14[10], &k[10]),
                (A14[11], &k[11]),
                (A14[12], k_new),
            ],
        ),
    )?;
    let k15 = f(
        x + C15 * h,
        &axpy(
            y,
            h,
            &[
                (A15[0], &k[0]),
                (A15[5], &k[5]),
                (A15[6], &k[6]),
                (A15[7], &k[7]),
                (A15[10], &k[10]),
                (A15[11], &k[11]),
                (A15[12], k_new),
                (A15[13], &k14),
            ],
        ),
    )?;
    let k16 = f(
        x + C16 * h,
        &axpy(
            y,
            h,
            &[
                (A16[0], &k[0]),
                (A16[5], &k[5]),
                (A16[6], &k[6]),
                (A16[7], &k[7]),
                (A16[8], &k[8]),
                (A16[12], k_new),
                (A16[13], &k14),
                (A16[14], &k15),
            ],
        ),
    )?;

    let mut c = [[0.0; N]; 8];
    for i in 0..N {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        c[0][i] = y[i];
        c[1][i] = ydiff;
        c[2][i] = bspl;
        c[3][i] = ydiff - h * k_new[i] - bspl;
        let all = |d: &[f64; 16]| {
            let mut s = 0.0;
            for st in 0..12 {
                s += d[st] * k[st][i];
            }
            s + d[12] * k_new[i] + d[13] * k14[i] + d[14] * k15[i] + d[15] * k16[i]
        };
        for (row, d) in D.iter().enumerate() {
            c[4 + row][i] = h * all(d);
        }
    }
    Ok(c)
}

// Coefficients of DOP853 (Hairer, Nørsett & Wanner). Stage 12 sits at c = 1.
const C: [f64; 12] = [
    0.0,
    0.526001519587677318785587544488E-01,
    0.789002279381515978178381316732E-01,
    0.118350341907227396726757197510E+00,
    0.281649658092772603273242802490E+00,
    0.333333333333333333333333333333E+00,
    0.25E+00,
    0.307692307692307692307692307692E+00,
    0.651282051282051282051282051282E+00,
    0.6E+00,
    0.857142857142857142857142857142E+00,
    1.0,
];
const C14: f64 = 0.1;
const C15: f64 = 0.2;
const C16: f64 = 0.777777777777777777777777777778;

const A: [[f64; 11]; 11] = [
    [5.26001519587677318785587544488E-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        1.97250569845378994544595329183E-2,
        5.91751709536136983633785987549E-2,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        2.95875854768068491816892993775E-2,
        0.0,
        8.87627564304205475450678981324E-2,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        2.41365134159266685502369798665E-1,
        0.0,
        -8.84549479328286085344864962717E-1,
        9.24834003261792003115737966543E-1,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.7037037037037037037037037037E-2,
        0.0,
        0.0,
        1.70828608729473871279604482173E-1,
        1.25467687566822425016691814123E-1,
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.7109375E-2,
        0.0,
        0.0,
        1.70252211019544039314978060272E-1,
        6.02165389804559606850219397283E-2,
        -1.7578125E-2,
        0.0, 0.0, 0.0, 0.0, 0.0,
    ],
    [
        3.70920001185047927108779319836E-2,
        0.0,
        0.0,
        1.70383925712239993810214054705E-1,
        1.07262030446373284651809199168E-1,
        -1.53194377486244017527936158236E-2,
        8.27378916381402288758473766002E-3,
        0.0, 0.0, 0.0, 0.0,
    ],
    [
        6.24110958716075717114429577812E-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825E0,
        -8.68219346841726006818189891453E-1,
        2.75920996994467083049415600797E1,
        2.01540675504778934086186788979E1,
        -4.34898841810699588477366255144E1,
        0.0, 0.0, 0.0,
    ],
    [
        4.77662536438264365890433908527E-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468E0,
        -5.90290826836842996371446475743E-1,
        2.12300514481811942347288949897E1,
        1.52792336328824235832596922938E1,
        -3.32882109689848629194453265587E1,
        -2.03312017085086261358222928593E-2,
        0.0, 0.0,
    ],
    [
        -9.3714243008598732571704021658E-1,
        0.0,
        0.0,
        5.18637242884406370830023853209E0,
        1.09143734899672957818500254654E0,
        -8.14978701074692612513997267357E0,
        -1.85200656599969598641566180701E1,
        2.27394870993505042818970056734E1,
        2.49360555267965238987089396762E0,
        -3.0467644718982195003823669022E0,
        0.0,
    ],
    [
        2.27331014751653820792359768449E0,
        0.0,
        0.0,
        -1.05344954667372501984066689879E1,
        -2.00087205822486249909675718444E0,
        -1.79589318631187989172765950534E1,
        2.79488845294199600508499808837E1,
        -2.85899827713502369474065508674E0,
        -8.87285693353062954433549289258E0,
        1.23605671757943030647266201528E1,
        6.43392746015763530355970484046E-1,
    ],
];

const B: [f64; 12] = [
    5.42937341165687622380535766363E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566E0,
    1.89151789931450038304281599044E0,
    -5.8012039600105847814672114227E0,
    3.1116436695781989440891606237E-1,
    -1.52160949662516078556178806805E-1,
    2.01365400804030348374776537501E-1,
    4.47106157277725905176885569043E-2,
];

const BHH: [f64; 3] = [
    0.244094488188976377952755905512E+00,
    0.733846688281611857341361741547E+00,
    0.220588235294117647058823529412E-01,
];

const E: [f64; 12] = [
    0.1312004499419488073250102996E-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753E+01,
    -0.4957589496572501915214079952E+00,
    0.1664377182454986536961530415E+01,
    -0.3503288487499736816886487290E+00,
    0.3341791187130174790297318841E+00,
    0.8192320648511571246570742613E-01,
    -0.2235530786388629525884427845E-01,
];

const A14: [f64; 13] = [
    5.61675022830479523392909219681E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    2.53500210216624811088794765333E-1,
    -2.46239037470802489917441475441E-1,
    -1.24191423263816360469010140626E-1,
    1.5329179827876569731206322685E-1,
    8.20105229563468988491666602057E-3,
    7.56789766054569976138603589584E-3,
    -8.298E-3,
];

const A15: [f64; 14] = [
    3.18346481635021405060768473261E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    2.83009096723667755288322961402E-2,
    5.35419883074385676223797384372E-2,
    -5.49237485713909884646569340306E-2,
    0.0,
    0.0,
    -1.08347328697249322858509316994E-4,
    3.82571090835658412954920192323E-4,
    -3.40465008687404560802977114492E-4,
    1.41312443674632500278074618366E-1,
];

const A16: [f64; 15] = [
    -4.28896301583791923408573538692E-1,
    0.0,
    0.0,
    0.0,
    0.0,
    -4.69762141536116384314449447206E0,
    7.68342119606259904184240953878E0,
    4.06898981839711007970213554331E0,
    3.56727187455281109270669543021E-1,
    0.0,
    0.0,
    0.0,
    -1.39902416515901462129418009734E-3,
    2.9475147891527723389556272149E0,
    -9.15095847217987001081870187138E0,
];

const D: [[f64; 16]; 4] = [
    [
        -0.84289382761090128651353491142E+01,
        0.0,
        0.0,
        0.0,
        0.0,
        0.56671495351937776962531783590E+00,
        -0.30689499459498916912797304727E+01,
        0.23846676565120698287728149680E+01,
        0.21170345824450282767155149946E+01,
        -0.87139158377797299206789907490E+00,
        0.22404374302607882758541771650E+01,
        0.63157877876946881815570249290E+00,
        -0.88990336451333310820698117400E-01,
        0.18148505520854727256656404962E+02,
        -0.91946323924783554000451984436E+01,
        -0.44360363875948939664310572000E+01,
    ],
    [
        0.10427508642579134603413151009E+02,
        0.0,
        0.0,
        0.0,
        0.0,
        0.24228349177525818288430175319E+03,
        0.16520045171727028198505394887E+03,
        -0.37454675472269020279518312152E+03,
        -0.22113666853125306036270938578E+02,
        0.77334326684722638389603898808E+01,
        -0.30674084731089398182061213626E+02,
        -0.93321305264302278729567221706E+01,
        0.15697238121770843886131091075E+02,
        -0.31139403219565177677282850411E+02,
        -0.93529243588444783865713862664E+01,
        0.35816841486394083752465898540E+02,
    ],
    [
        0.19985053242002433820987653617E+02,
        0.0,
        0.0,
        0.0,
        0.0,
        -0.38703730874935176555105901742E+03,
        -0.18917813819516756882830838328E+03,
        0.52780815920542364900561016686E+03,
        -0.11573902539959630126141871134E+02,
        0.68812326946963000169666922661E+01,
        -0.10006050966910838403183860980E+01,
        0.77771377980534432092869265740E+00,
        -0.27782057523535084065932004339E+01,
        -0.60196695231264120758267380846E+02,
        0.84320405506677161018159903784E+02,
        0.11992291136182789328035130030E+02,
    ],
    [
        -0.25693933462703749003312586129E+02,
        0.0,
        0.0,
        0.0,
        0.0,
        -0.15418974869023643374053993627E+03,
        -0.23152937917604549567536039109E+03,
        0.35763911791061412378285349910E+03,
        0.93405324183624310003907691704E+02,
        -0.37458323136451633156875139351E+02,
        0.10409964950896230045147246184E+03,
        0.29840293426660503123344363579E+02,
        -0.43533456590011143754432175058E+02,
        0.96324553959188282948394950600E+02,
        -0.39177261675615439165231486172E+02,
        -0.14972683625798562581422125276E+03,
    ],
];
