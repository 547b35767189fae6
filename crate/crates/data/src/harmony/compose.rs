//! Builds the five channel bodies and the prompt from a verified analysis.
//!
//! All wording lives in the two phrase tables below. `{}` slots are filled
//! positionally. The tables and [`TEMPLATE_VERSION`] are hashed into the
//! dataset manifest, so any wording change shows up there.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shaftlab_core::solver::ClosedForm;
use shaftlab_core::{Analysis, Level, LevelId, ShaftSpec, SurfaceFinish, VerificationReport};

use super::code::write_code;
use super::quantities::format_quantity;
use super::{render_doc, Channel, HarmonyDoc, RenderError};
use crate::numfmt::fmt6;

pub const TEMPLATE_VERSION: u32 = 1;

/// Stations of the reasoning table, including both ends.
const STATIONS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Locale {
    #[default]
    #[serde(rename = "pt-BR")]
    PtBr,
    #[serde(rename = "en")]
    En,
}

impl Locale {
    pub const ALL: [Locale; 2] = [Locale::PtBr, Locale::En];

    pub fn as_str(self) -> &'static str {
        match self {
            Locale::PtBr => "pt-BR",
            Locale::En => "en",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str().eq_ignore_ascii_case(s))
    }

    fn phrases(self) -> &'static Phrases {
        match self {
            Locale::PtBr => &PT_BR,
            Locale::En => &EN,
        }
    }
}

#[derive(Debug)]
struct Phrases {
    openers: [&'static str; 3],
    geometry: &'static str,
    material: &'static str,
    finishes: [&'static str; 4],
    loads_intro: &'static str,
    load_item: &'static str,
    torque: &'static str,
    service: &'static str,
    tasks: [&'static str; 3],
    level_names: [&'static str; 3],
    model: &'static str,
    section: &'static str,
    plans: [&'static str; 3],
    reactions: &'static str,
    table_intro: &'static str,
    table_row: &'static str,
    peak_deflection: &'static str,
    stress: &'static str,
    yield_safety: &'static str,
    marin: &'static str,
    endurance: &'static str,
    goodman: &'static str,
    verification_intro: &'static str,
    verification_row: &'static str,
    passed: &'static str,
    failed: &'static str,
    overall: &'static str,
}

static PT_BR: Phrases = Phrases {
    openers: [
        "Considere um eixo maciço de seção circular apoiado em dois mancais, em x = 0 e x = L.",
        "Um eixo de transmissão maciço está biapoiado em mancais nas extremidades x = 0 e x = L.",
        "Analise um eixo circular maciço sustentado por dois mancais simples, em x = 0 e x = L.",
    ],
    geometry: "Vão L = {} m; diâmetro d = {} m.",
    material: "Material: {} (E = {} Pa, ν = {}, Sy = {} Pa, Sut = {} Pa), acabamento {}.",
    finishes: ["retificado", "usinado", "laminado a quente", "forjado"],
    loads_intro: "Cargas transversais, positivas para baixo:",
    load_item: "P{} = {} N em x = {} m",
    torque: "Um torque T = {} N*m entra em x = {} m e sai em x = {} m.",
    service: "Condições de serviço: confiabilidade de {} % e temperatura de {} °C.",
    tasks: [
        "Determine as reações, os esforços internos e a linha elástica pela teoria de Timoshenko, informando a deflexão máxima.",
        "Determine a linha elástica pela teoria de Timoshenko e verifique o eixo quanto ao escoamento pelo critério de von Mises.",
        "Determine a linha elástica, verifique o escoamento por von Mises e avalie a vida em fadiga pelo critério de Goodman com os fatores de Marin.",
    ],
    level_names: ["bacharelado", "mestrado", "doutorado"],
    model: "Nível {}. Modelo: viga de Timoshenko biapoiada com cargas pontuais. Convenção: cargas e deflexões positivas para baixo, momento fletor positivo quando traciona a fibra inferior.",
    section: "Seção circular: A = {} m², I = {} m⁴, J = {} m⁴, κ = {} (Cowper), G = {} Pa.",
    plans: [
        "Plano: equilíbrio para as reações, V(x) e M(x) por trechos, flexão por superposição e parcela de cisalhamento M/(κGA).",
        "Plano: esforços e deflexões como no nível básico, depois tensões de flexão e torção, tensão equivalente de von Mises e fator de segurança ao escoamento.",
        "Plano: esforços, deflexões e von Mises, depois limite de resistência à fadiga corrigido por Marin e fator de segurança de Goodman na seção de momento máximo.",
    ],
    reactions: "Reações: R1 = {} N, R2 = {} N, soma {} N igual à carga total.",
    table_intro: "Esforços e deslocamentos em {} estações (limite à esquerda nas descontinuidades):",
    table_row: "x = {} m | V = {} N | M = {} N*m | θ = {} rad | w = {} m",
    peak_deflection: "Deflexão máxima w = {} m em x = {} m (flexão {} m, cisalhamento {} m).",
    stress: "Tensões: σ = 32M/(πd³) = {} Pa no pico de |M|, τ = 16T/(πd³) = {} Pa; σ_vm = √(σ² + 3τ²) atinge {} Pa em x = {} m.",
    yield_safety: "Segurança ao escoamento: n_y = Sy/σ_vm = {}.",
    marin: "Fatores de Marin: k_a = {}, k_b = {}, k_c = {}, k_d = {}, k_e = {}, k_f = {}.",
    endurance: "Limite de fadiga: Se' = {} Pa, Se = {} Pa.",
    goodman: "Goodman com σ_a = {} Pa (flexão rotativa em x = {} m) e σ_m = {} Pa (torção constante): 1/n = σ_a/Se + σ_m/Sut, n_f = {}.",
    verification_intro: "Verificação em seis níveis:",
    verification_row: "- {}: {} (métrica {})",
    passed: "aprovado",
    failed: "reprovado",
    overall: "Resultado global: {}.",
};

static EN: Phrases = Phrases {
    openers: [
        "Consider a solid round shaft supported by two bearings at x = 0 and x = L.",
        "A solid transmission shaft is simply supported by bearings at its ends x = 0 and x = L.",
        "Analyse a solid circular shaft carried on two simple bearings at x = 0 and x = L.",
    ],
    geometry: "Span L = {} m; diameter d = {} m.",
    material: "Material: {} (E = {} Pa, ν = {}, Sy = {} Pa, Sut = {} Pa), {} finish.",
    finishes: ["ground", "machined", "hot-rolled", "as-forged"],
    loads_intro: "Transverse loads, positive downward:",
    load_item: "P{} = {} N at x = {} m",
    torque: "A torque T = {} N*m enters at x = {} m and leaves at x = {} m.",
    service: "Service conditions: {} % reliability and {} °C operating temperature.",
    tasks: [
        "Find the reactions, internal forces and elastic curve with Timoshenko theory and report the maximum deflection.",
        "Find the elastic curve with Timoshenko theory and check the shaft against yielding with the von Mises criterion.",
        "Find the elastic curve, check yielding with von Mises and assess fatigue life with the Goodman criterion and Marin factors.",
    ],
    level_names: ["bachelor", "master", "doctor"],
    model: "Level {}. Model: simply supported Timoshenko beam under point loads. Convention: loads and deflections positive downward, sagging moment positive.",
    section: "Circular section: A = {} m², I = {} m⁴, J = {} m⁴, κ = {} (Cowper), G = {} Pa.",
    plans: [
        "Plan: equilibrium for the reactions, piecewise V(x) and M(x), bending deflection by superposition plus the shear part M/(κGA).",
        "Plan: forces and deflections as at the basic level, then bending and torsional stresses, von Mises equivalent stress and yield safety factor.",
        "Plan: forces, deflections and von Mises, then the Marin-corrected endurance limit and Goodman safety factor at the section of peak moment.",
    ],
    reactions: "Reactions: R1 = {} N, R2 = {} N, sum {} N equal to the total load.",
    table_intro: "Forces and displacements at {} stations (left limits at discontinuities):",
    table_row: "x = {} m | V = {} N | M = {} N*m | θ = {} rad | w = {} m",
    peak_deflection: "Maximum deflection w = {} m at x = {} m (bending {} m, shear {} m).",
    stress: "Stresses: σ = 32M/(πd³) = {} Pa at peak |M|, τ = 16T/(πd³) = {} Pa; σ_vm = √(σ² + 3τ²) peaks at {} Pa at x = {} m.",
    yield_safety: "Yield safety: n_y = Sy/σ_vm = {}.",
    marin: "Marin factors: k_a = {}, k_b = {}, k_c = {}, k_d = {}, k_e = {}, k_f = {}.",
    endurance: "Endurance limit: Se' = {} Pa, Se = {} Pa.",
    goodman: "Goodman with σ_a = {} Pa (rotating bending at x = {} m) and σ_m = {} Pa (steady torsion): 1/n = σ_a/Se + σ_m/Sut, n_f = {}.",
    verification_intro: "Six-level verification:",
    verification_row: "- {}: {} (metric {})",
    passed: "passed",
    failed: "failed",
    overall: "Overall: {}.",
};

/// Replaces each `{}` in `template` with the next argument.
fn fill(template: &str, args: &[&str]) -> String {
    let mut out = String::with_capacity(template.len() + 16 * args.len());
    let mut args = args.iter();
    let mut rest = template;
    while let Some(i) = rest.find("{}") {
        out.push_str(&rest[..i]);
        out.push_str(args.next().expect("template slot without argument"));
        rest = &rest[i + 2..];
    }
    debug_assert!(args.next().is_none(), "unused template argument");
    out.push_str(rest);
    out
}

/// SHA-256 (hex) over the template version and both phrase tables.
pub fn template_fingerprint() -> String {
    let mut h = Sha256::new();
    h.update(format!("v{TEMPLATE_VERSION}\n{PT_BR:?}\n{EN:?}"));
    format!("{:x}", h.finalize())
}

fn finish_index(f: SurfaceFinish) -> usize {
    SurfaceFinish::ALL.iter().position(|x| *x == f).expect("finish listed")
}

/// Everything a rendered sample is built from.
#[derive(Debug, Clone, Copy)]
pub struct ComposeInput<'a> {
    pub spec: &'a ShaftSpec,
    pub analysis: &'a Analysis,
    pub verification: &'a VerificationReport,
    pub locale: Locale,
}

/// Builds the document. Refuses records that did not pass verification.
pub fn compose(input: &ComposeInput<'_>) -> Result<HarmonyDoc, RenderError> {
    if let Some(f) = input.verification.first_failure() {
        return Err(RenderError::Unverified(f.level.as_str().to_string()));
    }
    let p = input.locale.phrases();
    let channels = vec![
        (Channel::Analysis, analysis_body(p, input)),
        (Channel::Reasoning, reasoning_body(p, input)),
        (Channel::Code, write_code(input.spec, &input.analysis.options)),
        (Channel::Verification, verification_body(p, input.verification)),
        (Channel::Result, result_body(input)),
    ];
    Ok(HarmonyDoc {
        prompt: prompt(p, input),
        channels,
        stopped: true,
    })
}

/// [`compose`] followed by [`render_doc`].
pub fn render(input: &ComposeInput<'_>) -> Result<String, RenderError> {
    render_doc(&compose(input)?)
}

fn level_index(level: Level) -> usize {
    level.index()
}

fn prompt(p: &Phrases, input: &ComposeInput<'_>) -> String {
    let s = input.spec;
    let m = &s.material;
    let variant = s.id.bytes().map(usize::from).sum::<usize>() % p.openers.len();
    let mut lines = vec![
        p.openers[variant].to_string(),
        fill(p.geometry, &[&fmt6(s.length), &fmt6(s.diameter)]),
        fill(
            p.material,
            &[
                &m.name,
                &fmt6(m.youngs_modulus),
                &fmt6(m.poisson_ratio),
                &fmt6(m.yield_strength),
                &fmt6(m.ultimate_strength),
                p.finishes[finish_index(m.surface_finish)],
            ],
        ),
        p.loads_intro.to_string(),
    ];
    for (i, load) in s.loads.iter().enumerate() {
        lines.push(fill(
            p.load_item,
            &[&(i + 1).to_string(), &fmt6(load.magnitude), &fmt6(load.position)],
        ));
    }
    if let Some(t) = &s.torque {
        lines.push(fill(
            p.torque,
            &[&fmt6(t.input.torque), &fmt6(t.input.position), &fmt6(t.output.position)],
        ));
    }
    let o = &input.analysis.options;
    if let (Some(r), Some(temp)) = (o.reliability, o.temperature_c) {
        lines.push(fill(p.service, &[&r.percent().to_string(), &fmt6(temp)]));
    }
    lines.push(p.tasks[level_index(o.level)].to_string());
    lines.join("\n")
}

fn analysis_body(p: &Phrases, input: &ComposeInput<'_>) -> String {
    let a = input.analysis;
    let sec = &a.section;
    let level = level_index(a.options.level);
    let lines = [
        fill(p.model, &[p.level_names[level]]),
        fill(
            p.section,
            &[
                &fmt6(sec.area),
                &fmt6(sec.second_moment),
                &fmt6(sec.polar_moment),
                &fmt6(sec.shear_coefficient),
                &fmt6(input.spec.material.shear_modulus()),
            ],
        ),
        p.plans[level].to_string(),
    ];
    format!("\n{}\n", lines.join("\n"))
}

fn reasoning_body(p: &Phrases, input: &ComposeInput<'_>) -> String {
    let s = input.spec;
    let a = input.analysis;
    let cf = ClosedForm::new(s).expect("analysed spec is valid");
    let r = a.reactions;
    let mut lines = vec![fill(p.reactions, &[&fmt6(r.left), &fmt6(r.right), &fmt6(r.left + r.right)])];
    lines.push(fill(p.table_intro, &[&STATIONS.to_string()]));
    for i in 0..STATIONS {
        let x = s.length * i as f64 / (STATIONS - 1) as f64;
        lines.push(fill(
            p.table_row,
            &[
                &fmt6(x),
                &fmt6(cf.shear(x)),
                &fmt6(cf.moment(x)),
                &fmt6(cf.rotation(x)),
                &fmt6(cf.deflection(x)),
            ],
        ));
    }
    let f = &a.fields;
    if let Some((i, w)) = shaftlab_core::scalar::argmax_abs(&f.deflection) {
        let x = f.x[i];
        lines.push(fill(
            p.peak_deflection,
            &[&fmt6(w), &fmt6(x), &fmt6(cf.bending_deflection(x)), &fmt6(cf.shear_deflection(x))],
        ));
    }
    if let Some(st) = &a.stress {
        let d = s.diameter;
        let sigma = shaftlab_core::bending_stress(shaftlab_core::scalar::max_abs(&f.moment), d);
        let tau = shaftlab_core::torsional_stress(shaftlab_core::scalar::max_abs(&f.torque), d);
        lines.push(fill(
            p.stress,
            &[&fmt6(sigma), &fmt6(tau), &fmt6(st.sigma_vm_max), &fmt6(st.location)],
        ));
        lines.push(fill(p.yield_safety, &[&fmt6(st.n_yield)]));
    }
    if let Some(fa) = &a.fatigue {
        let k = fa.factors.as_array().map(fmt6);
        let k: Vec<&str> = k.iter().map(String::as_str).collect();
        lines.push(fill(p.marin, &k));
        lines.push(fill(p.endurance, &[&fmt6(fa.se_prime), &fmt6(fa.se)]));
        lines.push(fill(
            p.goodman,
            &[&fmt6(fa.sigma_a_eq), &fmt6(fa.location), &fmt6(fa.sigma_m_eq), &fmt6(fa.n_fatigue)],
        ));
    }
    format!("\n{}\n", lines.join("\n"))
}

fn verification_body(p: &Phrases, report: &VerificationReport) -> String {
    let mut lines = vec![p.verification_intro.to_string()];
    for level in LevelId::ALL {
        if let Some(r) = report.get(level) {
            let verdict = if r.passed { p.passed } else { p.failed };
            lines.push(fill(p.verification_row, &[level.as_str(), verdict, &fmt6(r.metric)]));
        }
    }
    lines.push(fill(p.overall, &[if report.overall { p.passed } else { p.failed }]));
    format!("\n{}\n", lines.join("\n"))
}

fn result_body(input: &ComposeInput<'_>) -> String {
    let lines: Vec<String> = input
        .analysis
        .quantities(input.spec)
        .iter()
        .map(format_quantity)
        .collect();
    format!("\n{}\n", lines.join("\n"))
}
