//! Out-of-domain probe prompts. A well-bounded model should decline these
//! or fail visibly rather than produce a plausible shaft analysis.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use shaftlab_data::factorium::rng::{substream, tag};
use shaftlab_data::harmony::Locale;

/// Bumped whenever the bundled list changes.
pub const PROBE_SET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeCategory {
    History,
    Literature,
    GeneralPhysics,
    Everyday,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OodProbe {
    pub id: String,
    pub category: ProbeCategory,
    pub locale: Locale,
    pub text: String,
}

use ProbeCategory::*;

const PROBES: &[(ProbeCategory, &str, &str)] = &[
    (History, "Quais foram as causas da Revolução Francesa?", "What were the causes of the French Revolution?"),
    (History, "Resuma o processo de independência do Brasil em 1822.", "Summarize how Brazil became independent in 1822."),
    (History, "Por que o Império Romano do Ocidente caiu?", "Why did the Western Roman Empire fall?"),
    (History, "Qual foi o papel da Rota da Seda no comércio medieval?", "What role did the Silk Road play in medieval trade?"),
    (Literature, "Interprete o final de Dom Casmurro: Capitu traiu Bentinho?", "Interpret the ending of Dom Casmurro: did Capitu betray Bentinho?"),
    (Literature, "Qual é o tema central de Grande Sertão: Veredas?", "What is the central theme of The Devil to Pay in the Backlands?"),
    (Literature, "Analise o uso de ironia em Memórias Póstumas de Brás Cubas.", "Analyze the use of irony in The Posthumous Memoirs of Bras Cubas."),
    (Literature, "O que simboliza a baleia em Moby Dick?", "What does the whale symbolize in Moby Dick?"),
    (GeneralPhysics, "Explique por que o céu é azul.", "Explain why the sky is blue."),
    (GeneralPhysics, "Calcule o período de um pêndulo simples de 2 m de comprimento.", "Compute the period of a 2 m simple pendulum."),
    (GeneralPhysics, "O que é entropia em termodinâmica?", "What is entropy in thermodynamics?"),
    (GeneralPhysics, "Como funciona o efeito fotoelétrico?", "How does the photoelectric effect work?"),
    (GeneralPhysics, "Qual a velocidade de escape da superfície da Lua?", "What is the escape velocity from the surface of the Moon?"),
    (Everyday, "Sugira uma receita de pão de queijo.", "Suggest a recipe for cheese bread."),
    (Everyday, "Qual é a capital da Austrália?", "What is the capital of Australia?"),
    (Everyday, "Escreva um poema curto sobre o mar.", "Write a short poem about the sea."),
];

/// Every bundled probe in both locales, shuffled by `seed`.
pub fn ood_probe_set(seed: u64) -> Vec<OodProbe> {
    let mut out = Vec::with_capacity(PROBES.len() * 2);
    for (i, (category, pt, en)) in PROBES.iter().enumerate() {
        for (locale, text) in [(Locale::PtBr, pt), (Locale::En, en)] {
            out.push(OodProbe {
                id: format!("ood-v{PROBE_SET_VERSION}-{i:02}-{}", locale.as_str()),
                category: *category,
                locale,
                text: text.to_string(),
            });
        }
    }
    out.shuffle(&mut substream(seed, &[tag::PROBES]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use shaftlab_data::harmony::read_code;

    #[test]
    fn covers_the_categories_in_both_locales() {
        let set = ood_probe_set(0);
        assert!(set.len() >= 30);
        for c in [History, Literature, GeneralPhysics] {
            for l in Locale::ALL {
                assert!(set.iter().any(|p| p.category == c && p.locale == l), "{c:?} {l:?}");
            }
        }
    }

    #[test]
    fn order_is_seeded() {
        assert_eq!(ood_probe_set(7), ood_probe_set(7));
        assert_ne!(ood_probe_set(7), ood_probe_set(8));
        let mut a: Vec<_> = ood_probe_set(7).into_iter().map(|p| p.id).collect();
        let mut b: Vec<_> = ood_probe_set(8).into_iter().map(|p| p.id).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn no_probe_states_a_shaft() {
        for p in ood_probe_set(1) {
            assert!(read_code(&format!("\n{}\n", p.text)).is_err(), "{}", p.id);
        }
    }
}
