//! Operational framework for nonlinear quantum maps: generalized states
//! (finite weighted ensembles of ontic density matrices), nonlinear boxes
//! that act at the probability level, verifying sets, and a signalling audit
//! with a Helstrom-measurement Monte-Carlo protocol.

use std::fmt;
use std::sync::Arc;

use deutsch::{deutsch_output, CtcCircuit, FixedPointConfig};
use nalgebra::DMatrix;
use qcore::kets::*;
use qcore::{cr, hermitian_eigen, CMat, DensityMatrix};
use serde::Deserialize;
use thiserror::Error;

/// Trace-distance ball within which the pure-state boxes recognize their
/// designated inputs; outside it they act as the identity.
pub const EPS_BALL: f64 = 1e-6;
/// Simplified states closer than this are treated as equal.
pub const SIMPLIFY_TOL: f64 = 1e-10;
/// Minimum Helstrom gap for a SignallingPossible verdict.
pub const GAP_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum NlboxError {
    #[error(transparent)]
    Core(#[from] qcore::QcoreError),
    #[error(transparent)]
    Deutsch(#[from] deutsch::DeutschError),
    #[error("unknown box: {0}")]
    UnknownBox(String),
    #[error("invalid generalized state: {0}")]
    InvalidState(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("fixture parse error: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, NlboxError>;

/// A finite weighted ensemble of ontic density matrices: which density
/// matrix is real carries meaning beyond the ensemble average.
#[derive(Debug, Clone)]
pub struct GeneralizedState {
    support: Vec<(f64, DensityMatrix)>,
}

impl GeneralizedState {
    pub fn new(support: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if support.is_empty() {
            return Err(NlboxError::InvalidState("empty support".into()));
        }
        let dims = support[0].1.dims().to_vec();
        let mut total = 0.0;
        for (w, rho) in &support {
            if *w <= 0.0 {
                return Err(NlboxError::InvalidState(format!("non-positive weight {w}")));
            }
            if rho.dims() != dims.as_slice() {
                return Err(NlboxError::InvalidState("mixed subsystem dims".into()));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(NlboxError::InvalidState(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { support })
    }

    pub fn pure_point(rho: DensityMatrix) -> Self {
        Self {
            support: vec![(1.0, rho)],
        }
    }

    pub fn support(&self) -> &[(f64, DensityMatrix)] {
        &self.support
    }

    pub fn dims(&self) -> &[usize] {
        self.support[0].1.dims()
    }

    pub fn dim(&self) -> usize {
        self.support[0].1.dim()
    }
}

/// The ensemble average Σ wᵢ ρᵢ — all that a linear observer can see.
pub fn simplify(g: &GeneralizedState) -> DensityMatrix {
    let d = g.dim();
    let mut acc = CMat::zeros(d, d);
    for (w, rho) in g.support() {
        acc += rho.data() * cr(*w);
    }
    DensityMatrix::new(g.dims().to_vec(), acc).expect("convex mixture of valid states")
}

type BoxFn = dyn Fn(&DensityMatrix) -> Result<DensityMatrix> + Send + Sync;

/// A map on density matrices that need not be convex-linear; applied to a
/// generalized state it acts on each ontic member separately, leaving the
/// weights untouched.
#[derive(Clone)]
pub struct NonlinearBox {
    dims: Vec<usize>,
    label: String,
    map: Arc<BoxFn>,
}

impl fmt::Debug for NonlinearBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearBox")
            .field("dims", &self.dims)
            .field("label", &self.label)
            .finish()
    }
}

impl NonlinearBox {
    pub fn new<F>(dims: Vec<usize>, label: impl Into<String>, map: F) -> Self
    where
        F: Fn(&DensityMatrix) -> Result<DensityMatrix> + Send + Sync + 'static,
    {
        Self {
            dims,
            label: label.into(),
            map: Arc::new(map),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn map_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dims() != self.dims.as_slice() {
            return Err(qcore::QcoreError::DimensionMismatch {
                expected: self.dims.iter().product(),
                got: rho.dim(),
            }
            .into());
        }
        (self.map)(rho)
    }
}

pub fn apply_box(bx: &NonlinearBox, g: &GeneralizedState) -> Result<GeneralizedState> {
    let mut out = Vec::with_capacity(g.support().len());
    for (w, rho) in g.support() {
        out.push((*w, bx.map_state(rho)?));
    }
    GeneralizedState::new(out)
}

fn pure2(a: &qcore::CVec, b: &qcore::CVec) -> DensityMatrix {
    DensityMatrix::from_pure(vec![2, 2], &kron(a, b)).unwrap()
}

fn pure1(a: &qcore::CVec) -> DensityMatrix {
    DensityMatrix::from_pure(vec![2], a).unwrap()
}

/// Piecewise box: designated pure inputs (within `EPS_BALL` in trace
/// distance) are replaced by fixed outputs; everything else passes through.
fn lookup_box(
    dims: Vec<usize>,
    label: &str,
    table: Vec<(DensityMatrix, DensityMatrix)>,
) -> NonlinearBox {
    NonlinearBox::new(dims, label, move |rho| {
        for (input, output) in &table {
            if rho.trace_distance(input)? <= EPS_BALL {
                return Ok(output.clone());
            }
        }
        Ok(rho.clone())
    })
}

pub fn builtin_box(name: &str) -> Result<NonlinearBox> {
    match name {
        // Two qubits (data, ancilla): maps four nonorthogonal preparations
        // to the four computational basis states.
        "Brun" => Ok(lookup_box(
            vec![2, 2],
            "Brun",
            vec![
                (pure2(&ket0(), &ket0()), pure2(&ket0(), &ket0())),
                (pure2(&ket1(), &ket0()), pure2(&ket0(), &ket1())),
                (pure2(&ket_plus(), &ket0()), pure2(&ket1(), &ket0())),
                (pure2(&ket_minus(), &ket0()), pure2(&ket1(), &ket1())),
            ],
        )),
        // One qubit: swaps the y eigenstates onto the z axis, identity
        // elsewhere — nonlinear because it cannot extend to a channel.
        "AxisSwap" => Ok(lookup_box(
            vec![2],
            "AxisSwap",
            vec![
                (pure1(&ket_y_plus()), pure1(&ket0())),
                (pure1(&ket_y_minus()), pure1(&ket1())),
            ],
        )),
        other => Err(NlboxError::UnknownBox(other.into())),
    }
}

/// Wraps the closed-loop circuit's full input–output map as a box.
pub fn deutsch_box(circuit: CtcCircuit) -> NonlinearBox {
    let dims = circuit.dims_cr().to_vec();
    NonlinearBox::new(dims, format!("DeutschBox({}d loop)", circuit.d_ctc()), move |rho| {
        Ok(deutsch_output(&circuit, rho, &FixedPointConfig::default())?)
    })
}

/// How two equal-looking preparations can be told apart after the box.
#[derive(Debug, Clone)]
pub struct Witness {
    /// Convex weights over the member states forming each side of the pair.
    pub combo_a: Vec<f64>,
    pub combo_b: Vec<f64>,
    /// Human-readable description of the Helstrom measurement.
    pub measurement: String,
    /// Total-variation distance between outcome distributions (= trace
    /// distance between the boxed simplifications).
    pub distance: f64,
}

fn helstrom_description(delta: &CMat) -> String {
    let (evals, _) = hermitian_eigen(delta);
    format!(
        "projector onto the positive eigenspace of the output difference (eigenvalues {:?})",
        evals
            .iter()
            .map(|e| (e * 1e6).round() / 1e6)
            .collect::<Vec<_>>()
    )
}

/// Decides whether the box, restricted to this set, is operationally
/// nonlinear: some two convex combinations of members share a simplification
/// yet produce Helstrom-distinguishable outputs.
pub fn is_verifying_set(
    bx: &NonlinearBox,
    states: &[GeneralizedState],
) -> Result<(bool, Option<Witness>)> {
    if states.len() < 2 {
        return Ok((false, None));
    }
    let n = states.len();
    let simplified: Vec<DensityMatrix> = states.iter().map(simplify).collect();
    let mut boxed = Vec::with_capacity(n);
    for g in states {
        boxed.push(simplify(&apply_box(bx, g)?));
    }

    // Direct pairwise scan.
    for i in 0..n {
        for j in i + 1..n {
            if simplified[i].trace_distance(&simplified[j])? > SIMPLIFY_TOL {
                continue;
            }
            let gap = boxed[i].trace_distance(&boxed[j])?;
            if gap > GAP_THRESHOLD {
                let mut combo_a = vec![0.0; n];
                let mut combo_b = vec![0.0; n];
                combo_a[i] = 1.0;
                combo_b[j] = 1.0;
                let delta = boxed[i].data() - boxed[j].data();
                return Ok((
                    true,
                    Some(Witness {
                        combo_a,
                        combo_b,
                        measurement: helstrom_description(&delta),
                        distance: gap,
                    }),
                ));
            }
        }
    }

    // Convex-combination scan. The box acts affinely on mixtures of
    // generalized states, so it suffices to search the kernel of
    // ν ↦ (Σνᵢ, Σνᵢ·simplify(gᵢ)) for a direction whose boxed image is
    // nonzero; the positive/negative parts of ν are the two combinations.
    if n >= 3 {
        let d = states[0].dim();
        let rows = 1 + 2 * d * d;
        let mut m = DMatrix::<f64>::zeros(rows, n);
        for (col, s) in simplified.iter().enumerate() {
            m[(0, col)] = 1.0;
            for (k, z) in s.data().iter().enumerate() {
                m[(1 + 2 * k, col)] = z.re;
                m[(2 + 2 * k, col)] = z.im;
            }
        }
        let svd = m.svd(false, true);
        let vt = svd.v_t.expect("requested right singular vectors");
        // Kernel vectors: rows of V^T whose singular value is ~0 (rows past
        // the singular-value list, if any, are also in the kernel).
        for row_idx in 0..vt.nrows() {
            let in_kernel = row_idx >= svd.singular_values.len()
                || svd.singular_values[row_idx] < 1e-9;
            if !in_kernel {
                continue;
            }
            let nu: Vec<f64> = vt.row(row_idx).iter().copied().collect();
            let mut delta = CMat::zeros(d, d);
            for (i, c) in nu.iter().enumerate() {
                delta += boxed[i].data() * cr(*c);
            }
            let mass: f64 = nu.iter().map(|c| c.max(0.0)).sum();
            if mass < 1e-12 {
                continue;
            }
            // gap = trace distance between the normalized positive and
            // negative parts' boxed simplifications
            let evals = qcore::hermitian_eigenvalues(&delta);
            let gap = evals.iter().map(|e| e.abs()).sum::<f64>() / (2.0 * mass);
            if gap > GAP_THRESHOLD {
                let combo_a: Vec<f64> = nu.iter().map(|c| c.max(0.0) / mass).collect();
                let combo_b: Vec<f64> = nu.iter().map(|c| (-c).max(0.0) / mass).collect();
                return Ok((
                    true,
                    Some(Witness {
                        combo_a,
                        combo_b,
                        measurement: helstrom_description(&delta),
                        distance: gap,
                    }),
                ));
            }
        }
    }

    Ok((false, None))
}

/// One remote-preparation scheme: for each of the sender's settings, the
/// generalized state the receiver ends up holding. All settings must look
/// identical to a linear observer.
#[derive(Debug, Clone)]
pub struct RemotePreparation {
    pub label: String,
    settings: Vec<(String, GeneralizedState)>,
}

impl RemotePreparation {
    pub fn new(label: impl Into<String>, settings: Vec<(String, GeneralizedState)>) -> Result<Self> {
        if settings.is_empty() {
            return Err(NlboxError::InvalidState("no settings".into()));
        }
        let base = simplify(&settings[0].1);
        for (name, g) in &settings[1..] {
            if simplify(g).trace_distance(&base)? > SIMPLIFY_TOL {
                return Err(NlboxError::InvalidState(format!(
                    "setting {name} has a different ensemble average; it would signal even linearly"
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            settings,
        })
    }

    pub fn settings(&self) -> &[(String, GeneralizedState)] {
        &self.settings
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoSignalling,
    SignallingPossible,
}

#[derive(Debug, Clone)]
pub struct AuditWitness {
    pub prep_label: String,
    pub witness: Witness,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub verdict: Verdict,
    pub witnesses: Vec<AuditWitness>,
}

/// A remote preparation signals iff its ensemble set is a verifying set for
/// the box: the receiver could then learn the sender's setting.
pub fn signalling_audit(bx: &NonlinearBox, preps: &[RemotePreparation]) -> Result<AuditReport> {
    let mut witnesses = Vec::new();
    for prep in preps {
        let states: Vec<GeneralizedState> =
            prep.settings.iter().map(|(_, g)| g.clone()).collect();
        let (verifying, witness) = is_verifying_set(bx, &states)?;
        if verifying {
            witnesses.push(AuditWitness {
                prep_label: prep.label.clone(),
                witness: witness.expect("verifying implies witness"),
            });
        }
    }
    Ok(AuditReport {
        verdict: if witnesses.is_empty() {
            Verdict::NoSignalling
        } else {
            Verdict::SignallingPossible
        },
        witnesses,
    })
}

#[derive(Debug, Clone)]
pub struct GisinEstimate {
    pub success: f64,
    pub analytic: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// Monte-Carlo signalling protocol for a two-setting preparation: the sender
/// picks a setting uniformly, the world samples an ontic state from that
/// ensemble, the box acts, and the receiver applies the Helstrom measurement
/// between the two boxed ensemble averages and guesses the setting.
pub fn gisin_experiment(
    bx: &NonlinearBox,
    prep: &RemotePreparation,
    trials: usize,
    seed: u64,
) -> Result<GisinEstimate> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    if prep.settings.len() != 2 {
        return Err(NlboxError::NotApplicable(format!(
            "protocol needs exactly two settings, got {}",
            prep.settings.len()
        )));
    }
    let boxed: Vec<GeneralizedState> = prep
        .settings
        .iter()
        .map(|(_, g)| apply_box(bx, g))
        .collect::<Result<_>>()?;
    let sigma0 = simplify(&boxed[0]);
    let sigma1 = simplify(&boxed[1]);
    let t = sigma0.trace_distance(&sigma1)?;
    let analytic = 0.5 * (1.0 + t);

    // Helstrom measurement: project onto the positive eigenspace of σ0−σ1.
    let delta = sigma0.data() - sigma1.data();
    let (evals, evecs) = hermitian_eigen(&delta);
    let d = sigma0.dim();
    let mut p_plus = CMat::zeros(d, d);
    for (k, ev) in evals.iter().enumerate() {
        if *ev > 0.0 {
            let v = evecs.column(k);
            p_plus += v * v.adjoint();
        }
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0usize;
    for _ in 0..trials {
        let setting = usize::from(rng.gen_bool(0.5));
        // sample an ontic member of the boxed ensemble by weight
        let ensemble = &boxed[setting];
        let mut u: f64 = rng.gen();
        let mut ontic = &ensemble.support()[0].1;
        for (w, rho) in ensemble.support() {
            if u < *w {
                ontic = rho;
                break;
            }
            u -= w;
        }
        let p_guess_zero = (p_plus.clone() * ontic.data()).trace().re.clamp(0.0, 1.0);
        let guess = usize::from(!rng.gen_bool(p_guess_zero));
        if guess == setting {
            correct += 1;
        }
    }
    let success = correct as f64 / trials as f64;
    let std_err = (analytic * (1.0 - analytic) / trials as f64)
        .sqrt()
        .max(1.0 / trials as f64);
    Ok(GisinEstimate {
        success,
        analytic,
        std_err,
        trials,
    })
}

// ---------------------------------------------------------------------------
// Fixture ontologies (data files in the scenario config format)
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FixtureFile {
    label: String,
    settings: Vec<FixtureSetting>,
}

#[derive(Deserialize)]
struct FixtureSetting {
    name: String,
    support: Vec<FixtureMember>,
}

#[derive(Deserialize)]
struct FixtureMember {
    weight: f64,
    /// Tensor factors by name: z+, z-, x+, x-, y+, y-, mixed.
    state: Vec<String>,
}

fn named_factor(name: &str) -> Result<DensityMatrix> {
    Ok(match name {
        "z+" => pure1(&ket0()),
        "z-" => pure1(&ket1()),
        "x+" => pure1(&ket_plus()),
        "x-" => pure1(&ket_minus()),
        "y+" => pure1(&ket_y_plus()),
        "y-" => pure1(&ket_y_minus()),
        "mixed" => DensityMatrix::maximally_mixed(vec![2]),
        other => return Err(NlboxError::Fixture(format!("unknown state name {other}"))),
    })
}

/// Parses a remote-preparation fixture from its JSON description.
pub fn parse_ontology(json: &str) -> Result<RemotePreparation> {
    let file: FixtureFile =
        serde_json::from_str(json).map_err(|e| NlboxError::Fixture(e.to_string()))?;
    let mut settings = Vec::new();
    for s in file.settings {
        let mut support = Vec::new();
        for m in s.support {
            let mut rho = named_factor(
                m.state
                    .first()
                    .ok_or_else(|| NlboxError::Fixture("empty state".into()))?,
            )?;
            for f in &m.state[1..] {
                rho = rho.tensor(&named_factor(f)?);
            }
            support.push((m.weight, rho));
        }
        settings.push((s.name, GeneralizedState::new(support)?));
    }
    RemotePreparation::new(file.label, settings)
}

/// Built-in fixture ontologies, shipped as data files.
pub fn builtin_ontology(name: &str) -> Result<RemotePreparation> {
    let json = match name {
        // proper computational vs conjugate-basis mixtures (signalling)
        "O_s" => include_str!("../fixtures/ontology_os.json"),
        // the same settings realized as the improper maximally mixed state
        "O_ns" => include_str!("../fixtures/ontology_ons.json"),
        // three equal-average single-qubit ensembles probing the axis swap
        "AxisAppendix" => include_str!("../fixtures/ontology_axis_appendix.json"),
        // improper vs proper realization of the same mixed state
        "HeisenbergCutPair" => include_str!("../fixtures/ontology_heisenberg_cut.json"),
        other => return Err(NlboxError::UnknownBox(other.into())),
    };
    parse_ontology(json)
}
