use std::fmt::Write as _;

use nalgebra::Point2;
use serde::{Serialize, Serializer};

use super::anchors::{anchor_distribution, AnchorReport, BaseLoad};
use super::format::StructuralInput;
use super::truss::{solve_cases, MemberGroup, MemberReport, TrussModel, TrussSolution};
use super::units;
use super::StructuralError;
use crate::numfmt::fixed;

fn option_finite<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FosSummary {
    /// Smallest factor of safety over base members; infinite (null) if none carry load.
    #[serde(serialize_with = "option_finite")]
    pub min_fos_base: f64,
    #[serde(serialize_with = "option_finite")]
    pub min_fos_skeleton: f64,
    pub pass: bool,
    /// Members below their gate, by index.
    pub offenders: Vec<usize>,
}

/// Gates base members at FOS > 5 and every other member at FOS > 3.
pub fn fos_summary(reports: &[MemberReport], base_member_ids: &[usize]) -> Result<FosSummary, StructuralError> {
    if reports.is_empty() {
        return Err(StructuralError::EmptyReports);
    }
    let mut min_base = f64::INFINITY;
    let mut min_skel = f64::INFINITY;
    let mut offenders = Vec::new();
    for r in reports {
        let base = base_member_ids.contains(&r.member);
        let (slot, gate) = if base {
            (&mut min_base, units::BASE_MIN_FOS)
        } else {
            (&mut min_skel, units::SKELETON_MIN_FOS)
        };
        *slot = slot.min(r.factor_of_safety);
        if r.factor_of_safety <= gate {
            offenders.push(r.member);
        }
    }
    Ok(FosSummary {
        min_fos_base: min_base,
        min_fos_skeleton: min_skel,
        pass: offenders.is_empty(),
        offenders,
    })
}

pub fn base_members(model: &TrussModel) -> Vec<usize> {
    (0..model.members.len()).filter(|&i| model.members[i].group == MemberGroup::Base).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotEvaluated,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotEvaluated => "not evaluated",
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementRow {
    pub requirement: String,
    pub protocol: String,
    pub result: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub solution: TrussSolution,
    pub fos: FosSummary,
    pub anchors: Option<AnchorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplianceReport {
    pub requirements: Vec<RequirementRow>,
    pub cases: Vec<CaseReport>,
    pub pass: bool,
}

const LOAD_MATCH: f64 = 1e-6;

/// Solves every load case and checks the results against the Black Rock City table.
pub fn compliance_report(input: &StructuralInput) -> Result<ComplianceReport, StructuralError> {
    if input.cases.is_empty() {
        return Err(StructuralError::InvalidLoad("no load cases".into()));
    }
    let base_ids = base_members(&input.model);
    let anchors: Vec<Point2<f64>> = input.anchors.iter().map(|a| Point2::new(a[0], a[1])).collect();
    let centre = if anchors.is_empty() {
        Point2::origin()
    } else {
        Point2::from(anchors.iter().map(|p| p.coords).sum::<nalgebra::Vector2<f64>>() / anchors.len() as f64)
    };
    let mut cases = Vec::new();
    for solved in solve_cases(&input.model, &input.cases) {
        let solution = solved?;
        let fos = fos_summary(&solution.members, &base_ids)?;
        let anchor_report = if anchors.is_empty() {
            None
        } else {
            Some(anchor_distribution(&anchors, &BaseLoad::from_reactions(&input.model, &solution, &centre))?)
        };
        cases.push(CaseReport {
            solution,
            fos,
            anchors: anchor_report,
        });
    }

    let mut rows = Vec::new();
    let gust = units::design_gust_ms();
    let fastest = input.cases.iter().filter_map(|c| c.wind.as_ref().map(|w| w.speed_ms)).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    rows.push(RequirementRow {
        requirement: "Wind Gust Design".into(),
        protocol: "75 mph".into(),
        result: match fastest {
            Some(v) => format!("{} mph ({} m/s) analysed", fixed(v / units::MPH_TO_MS, 1), fixed(v, 3)),
            None => "no wind case".into(),
        },
        status: fastest.map_or(Status::NotEvaluated, |v| Status::of(v >= gust - LOAD_MATCH)),
    });

    let anchor_reports: Vec<&AnchorReport> = cases.iter().filter_map(|c| c.anchors.as_ref()).collect();
    if anchor_reports.is_empty() {
        for (req, proto) in [("Anchor Spec", "3,000+ lbs tension, 22\" helical"), ("Anchor Spacing", ">= 3 ft apart")] {
            rows.push(RequirementRow {
                requirement: req.into(),
                protocol: proto.into(),
                result: "no anchors".into(),
                status: Status::NotEvaluated,
            });
        }
    } else {
        let max_t = anchor_reports.iter().map(|a| a.max_tension).fold(f64::NEG_INFINITY, f64::max);
        let cap = units::anchor_capacity_n();
        rows.push(RequirementRow {
            requirement: "Anchor Spec".into(),
            protocol: "3,000+ lbs tension, 22\" helical".into(),
            result: format!("max tension {} N ({} lbf)", fixed(max_t, 1), fixed(max_t / units::LBF_TO_N, 1)),
            status: Status::of(max_t <= cap),
        });
        let min_s = anchor_reports[0].min_spacing;
        rows.push(RequirementRow {
            requirement: "Anchor Spacing".into(),
            protocol: ">= 3 ft apart".into(),
            result: format!("min spacing {} mm ({} ft)", fixed(min_s, 1), fixed(min_s / units::FT_TO_MM, 2)),
            status: Status::of(anchor_reports[0].spacing_violations.is_empty()),
        });
    }

    let min_base = cases.iter().map(|c| c.fos.min_fos_base).fold(f64::INFINITY, f64::min);
    let min_skel = cases.iter().map(|c| c.fos.min_fos_skeleton).fold(f64::INFINITY, f64::min);
    let show = |v: f64| if v.is_finite() { fixed(v, 2) } else { "inf".into() };
    rows.push(RequirementRow {
        requirement: "Factor of Safety".into(),
        protocol: "> 5 base, > 3 skeleton".into(),
        result: format!("base {}, skeleton {}", show(min_base), show(min_skel)),
        status: Status::of(cases.iter().all(|c| c.fos.pass)),
    });

    let largest_down = |c: &super::truss::LoadCase| c.point_loads.iter().map(|p| -p.force[2]).fold(0.0f64, f64::max);
    let static_n = units::lbf_to_n(units::CLIMB_STATIC_LBF);
    let dynamic_n = units::lbf_to_n(units::CLIMB_DYNAMIC_LBF);
    let has_static = input.cases.iter().any(|c| largest_down(c) >= static_n - LOAD_MATCH);
    let has_dynamic = input.cases.iter().any(|c| largest_down(c) >= dynamic_n - LOAD_MATCH);
    rows.push(RequirementRow {
        requirement: "Climb Load".into(),
        protocol: "250 lbs/pt, dynamic 400 lbs".into(),
        result: format!(
            "static {}, dynamic {}",
            if has_static { "analysed" } else { "missing" },
            if has_dynamic { "analysed" } else { "missing" }
        ),
        status: if has_static || has_dynamic {
            Status::of(has_static && has_dynamic)
        } else {
            Status::NotEvaluated
        },
    });

    let pass = rows.iter().all(|r| r.status == Status::Pass);
    Ok(ComplianceReport {
        requirements: rows,
        cases,
        pass,
    })
}

pub fn compliance_markdown(report: &ComplianceReport) -> String {
    let mut s = String::new();
    s.push_str("# Structural compliance\n\n| Requirement | Protocol | Result | Status |\n|---|---|---|---|\n");
    for r in &report.requirements {
        let _ = writeln!(s, "| {} | {} | {} | {} |", r.requirement, r.protocol, r.result, r.status.label());
    }
    let _ = writeln!(s, "\nOverall: {}", if report.pass { "PASS" } else { "FAIL" });
    for c in &report.cases {
        let _ = writeln!(s, "\n## Case `{}`\n", c.solution.case);
        s.push_str("| Member | Group | Force (N) | Capacity (N) | Utilization | FOS |\n|---|---|---|---|---|---|\n");
        for m in &c.solution.members {
            let fos = if m.factor_of_safety.is_finite() {
                fixed(m.factor_of_safety, 2)
            } else {
                "inf".into()
            };
            let group = match m.group {
                MemberGroup::Base => "base",
                MemberGroup::Skeleton => "skeleton",
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                m.name,
                group,
                fixed(m.force, 1),
                fixed(m.capacity, 1),
                fixed(m.utilization, 3),
                fos
            );
        }
        if !c.fos.offenders.is_empty() {
            let names: Vec<&str> = c.fos.offenders.iter().map(|&i| c.solution.members[i].name.as_str()).collect();
            let _ = writeln!(s, "\nBelow gate: {}", names.join(", "));
        }
        if let Some(a) = &c.anchors {
            s.push_str("\n| Anchor | x (mm) | y (mm) | Tension (N) | Shear (N) |\n|---|---|---|---|---|\n");
            for l in &a.anchors {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} |",
                    l.anchor,
                    fixed(l.position[0], 1),
                    fixed(l.position[1], 1),
                    fixed(l.tension, 1),
                    fixed(l.shear, 1)
                );
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structural::format::parse_structural;
    use crate::structural::truss::{Member, MemberReport};

    fn report(member: usize, fos: f64) -> MemberReport {
        let m = Member::new("m", 0, 1, 1.0, 1000.0);
        MemberReport::new(member, &m, -1000.0 / fos)
    }

    #[test]
    fn gate_examples() {
        let s = fos_summary(&[report(0, 5.2), report(1, 3.4)], &[0]).unwrap();
        assert!(s.pass);
        assert!((s.min_fos_base - 5.2).abs() < 1e-9 && (s.min_fos_skeleton - 3.4).abs() < 1e-9);

        let s = fos_summary(&[report(0, 5.2), report(1, 2.9)], &[0]).unwrap();
        assert!(!s.pass);
        assert_eq!(s.offenders, vec![1]);

        let zero = MemberReport::new(2, &Member::new("z", 0, 1, 1.0, 1.0), 0.0);
        let s = fos_summary(&[report(0, 6.0), report(1, 4.0), zero], &[0]).unwrap();
        assert!(s.pass && (s.min_fos_skeleton - 4.0).abs() < 1e-9);

        // a base member at 4 passes the skeleton gate but not its own
        assert!(!fos_summary(&[report(0, 4.0)], &[0]).unwrap().pass);
        assert_eq!(fos_summary(&[], &[]).unwrap_err(), StructuralError::EmptyReports);
    }

    #[test]
    fn tripod_report() {
        let src = "\
joint a 1500 0 0 pinned
joint b -750 1299.0381 0 pinned
joint c -750 -1299.0381 0 pinned
joint top 0 0 2500
member ta top a area=400 yield=240 group=base
member tb top b area=400 yield=240 group=base
member tc top c area=400 yield=240 group=base
anchor 1500 0
anchor -750 1299.0381
anchor -750 -1299.0381
case climb-static
climb top static
case climb-dynamic
climb top dynamic
case gust
wind mph=75 dir=1,0,0
exposure top 2
";
        let input = parse_structural(src).unwrap();
        let r = compliance_report(&input).unwrap();
        assert!(r.pass, "{:#?}", r.requirements);
        assert_eq!(r.requirements.len(), 5);
        for c in &r.cases {
            let applied: nalgebra::Vector3<f64> = input.cases.iter().find(|k| k.name == c.solution.case).unwrap().joint_forces(&input.model).unwrap().iter().sum();
            assert!((c.solution.total_reaction() + applied).norm() < 1e-6);
            let a = c.anchors.as_ref().unwrap();
            let up: f64 = a.anchors.iter().map(|l| l.tension).sum();
            assert!((up - applied.z).abs() < 1e-6);
        }
        let md = compliance_markdown(&r);
        assert!(md.contains("| Wind Gust Design | 75 mph | 75 mph (33.528 m/s) analysed | PASS |"));
        assert!(md.contains("Overall: PASS"));
    }
}
