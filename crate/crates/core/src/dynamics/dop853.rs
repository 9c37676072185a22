//! Dormand-Prince 8(5,3) with FSAL and step-size control, specialised to
//! the three-component Bloch system. Coefficients follow Hairer's DOP853.

pub(crate) type Vec3 = [f64; 3];

const STAGES: usize = 12;

const C: [f64; STAGES] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
const B: [f64; STAGES] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];

// Embedded 5th and 3rd order error weights; the last entry multiplies
// the slope at the new point.
const E5: [f64; STAGES + 1] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0];
const E3: [f64; STAGES + 1] = [-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082, 0.0];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

/// Result of one attempted step.
pub(crate) struct Attempt {
    pub y_new: Vec3,
    pub k_last: Vec3,
    /// Scaled error norm; the step is acceptable when ≤ 1.
    pub error: f64,
}

/// One DOP853 step from (t, y) with slope `k1 = f(t, y)`.
pub(crate) fn attempt<F, E>(f: &mut F, t: f64, y: &Vec3, k1: &Vec3, h: f64, rel_tol: f64, abs_tol: f64) -> Result<Attempt, E>
where
    F: FnMut(f64, &Vec3) -> Result<Vec3, E>,
{
    let mut k = [[0.0; 3]; STAGES + 1];
    k[0] = *k1;
    for s in 1..STAGES {
        let mut ys = *y;
        for (i, yi) in ys.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[j][i];
            }
            *yi += h * acc;
        }
        k[s] = f(t + C[s] * h, &ys)?;
    }
    let mut y_new = *y;
    for (i, yi) in y_new.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..STAGES {
            acc += B[j] * k[j][i];
        }
        *yi += h * acc;
    }
    k[STAGES] = f(t + h, &y_new)?;

    let (mut e5, mut e3) = (0.0, 0.0);
    for i in 0..3 {
        let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
        let (mut a5, mut a3) = (0.0, 0.0);
        for j in 0..=STAGES {
            a5 += E5[j] * k[j][i];
            a3 += E3[j] * k[j][i];
        }
        e5 += (a5 / scale).powi(2);
        e3 += (a3 / scale).powi(2);
    }
    let error = if e5 == 0.0 && e3 == 0.0 {
        0.0
    } else {
        h.abs() * e5 / ((e5 + 0.01 * e3) * 3.0).sqrt()
    };
    Ok(Attempt {
        y_new,
        k_last: k[STAGES],
        error,
    })
}

/// Step-size factor for the next attempt given a scaled error.
pub(crate) fn step_factor(error: f64, accepted_last: bool) -> f64 {
    if error == 0.0 {
        return FAC_MAX;
    }
    let fac = SAFETY * error.powf(ERROR_EXPONENT);
    let upper = if accepted_last { FAC_MAX } else { 1.0 };
    fac.clamp(FAC_MIN, upper)
}

/// Initial step guess (Hairer, Nørsett & Wanner, II.4).
pub(crate) fn initial_step<F, E>(f: &mut F, t: f64, y: &Vec3, k1: &Vec3, span: f64, rel_tol: f64, abs_tol: f64) -> Result<f64, E>
where
    F: FnMut(f64, &Vec3) -> Result<Vec3, E>,
{
    let scale = |i: usize| abs_tol + rel_tol * y[i].abs();
    let norm = |v: &Vec3| ((0..3).map(|i| (v[i] / scale(i)).powi(2)).sum::<f64>() / 3.0).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1 = [y[0] + h0 * k1[0], y[1] + h0 * k1[1], y[2] + h0 * k1[2]];
    let k2 = f(t + h0, &y1)?;
    let diff = [k2[0] - k1[0], k2[1] - k1[1], k2[2] - k1[2]];
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    Ok((100.0 * h0).min(h1).min(span))
}
