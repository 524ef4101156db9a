//! A tripod frame checked against the 75 mph gust and the climb loads, with
//! the compliance table printed as Markdown.

use fabtwin::structural::{compliance_markdown, compliance_report, parse_structural, units, wind_drag_force};

const FRAME: &str = "
joint a      0    0 0 pinned
joint b   2000    0 0 pinned
joint c   1000 1732 0 pinned
joint top 1000  577 2500
member ta top a area=450 yield=240 group=base
member tb top b area=450 yield=240 group=base
member tc top c area=450 yield=240 group=base
anchor 0 0
anchor 2000 0
anchor 1000 1732
case climb
climb top static
case climb-dynamic
climb top dynamic
case gust-x
wind mph=75 dir=1,0,0
exposure top 2.5
case gust-y
wind mph=75 dir=0,1,0
exposure top 2.5
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = units::design_gust_ms();
    println!("design gust {v} m/s, drag on 1 m² at C_d 1.2: {:.1} N\n", wind_drag_force(v, 1.2, 1.0, 1.225)?);
    let input = parse_structural(FRAME)?;
    let report = compliance_report(&input)?;
    print!("{}", compliance_markdown(&report));
    Ok(())
}
