//! Plain-text tables. Significant cells carry ▲ (female synergy) or
//! ▼ (male synergy) with their bucket; light cells show ·.

use std::fmt::Write as _;

use super::encoder::EncoderReport;
use super::stage1::Stage1Report;
use super::stage2::Stage2Report;
use super::Provenance;

fn header(out: &mut String, title: &str, p: &Provenance) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "{} {} | manifest {} | seed {} | iterations {} | outcome {:?}",
        p.toolkit, p.version, p.manifest_sha256, p.seed, p.iterations, p.outcome
    );
    out.push('\n');
}

pub fn stage1_table(r: &Stage1Report) -> String {
    let mut out = String::new();
    header(&mut out, "Stage 1: univariate gender rates", &r.provenance);

    let _ = writeln!(out, "Subgroups (mean ± SD of P̂)");
    for s in &r.subgroups {
        let sd = s.sd_p_hat.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            out,
            "  {:<5} {:<20} {:>3}  {:.3} ± {}",
            s.axis.abbrev(),
            s.group,
            s.n_descriptors,
            s.mean_p_hat,
            sd
        );
    }

    let _ = writeln!(out, "\nDescriptors (tiers at alpha = {})", r.alpha);
    let _ = writeln!(out, "  {:<5} {:<24} {:>5} {:>7} {:>8} {:>10}  tier", "axis", "descriptor", "n", "P̂", "logit", "binom p");
    for d in &r.descriptors {
        let _ = writeln!(
            out,
            "  {:<5} {:<24} {:>5} {:>7.3} {:>8.3} {:>10.3e}  {}",
            d.axis.abbrev(),
            d.surface,
            d.n,
            d.p_hat,
            d.logit,
            d.binomial_p,
            d.tier.abbrev()
        );
    }

    let s = &r.seed_set;
    let _ = writeln!(out, "\nSeed set");
    let _ = writeln!(out, "  status:          {}", s.status.join(", "));
    let _ = writeln!(out, "  female careers:  {}", s.career_female.join(", "));
    let _ = writeln!(out, "  male careers:    {}", s.career_male.join(", "));
    let _ = writeln!(out, "  female personas: {}", s.persona_female.join(", "));
    let _ = writeln!(out, "  male personas:   {}", s.persona_male.join(", "));
    out
}

pub fn stage2_table(r: &Stage2Report) -> String {
    let mut out = String::new();
    header(&mut out, "Stage 2: compositional interactions", &r.provenance);

    let mut family = "";
    for c in &r.cells {
        if c.family != family {
            family = &c.family;
            let _ = writeln!(out, "{family}");
        }
        let _ = writeln!(
            out,
            "  {} {:<34} P̂ {:.3}  I {:>+8.3}  p {:.4}  {}",
            c.marker, c.label, c.mean_p_hat, c.i_value, c.p_value, c.color
        );
    }

    let _ = writeln!(out, "\nPer-combination terms");
    for i in &r.interactions {
        let _ = writeln!(
            out,
            "  {:<58} n {:>5}  P̂ {:.3}  I {:>+8.3}  p {:.4}  {}",
            i.surfaces.join(" + "),
            i.n,
            i.p_hat,
            i.i_value,
            i.p_value,
            i.color
        );
    }

    let v = &r.paradigm;
    let names: Vec<&str> = v.paradigms.iter().map(|p| p.label()).collect();
    let _ = writeln!(
        out,
        "\nParadigm (heuristic): {}",
        if names.is_empty() { "unclassified".to_string() } else { names.join(", ") }
    );
    let _ = writeln!(out, "  max |cell I| = {:.3}", v.max_abs_cell_i);
    for e in &v.evidence {
        let _ = writeln!(out, "  {e}");
    }
    out
}

pub fn encoder_table(r: &EncoderReport) -> String {
    let mut out = String::new();
    header(&mut out, "Encoder associations (Cohen's d of Δ)", &r.provenance);
    let _ = write!(out, "  {:<5} {:<20}", "axis", "group");
    for e in &r.encoders {
        let _ = write!(out, " {e:>24}");
    }
    out.push('\n');
    for row in &r.rows {
        let _ = write!(out, "  {:<5} {:<20}", row.axis.abbrev(), row.group);
        for c in &row.cells {
            let v = c.cohens_d.map_or_else(|| "n/a".to_string(), |d| format!("{d:+.3}"));
            let _ = write!(out, " {:>24}", format!("{v} {}", c.color));
        }
        out.push('\n');
    }
    out
}
