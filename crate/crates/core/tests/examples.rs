//! Every runnable example doubles as a test.

mod jet_derivatives {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/jet_derivatives.rs"));
}

#[test]
fn jet_derivatives_runs() {
    jet_derivatives::run_example().expect("jet_derivatives example should run");
}

mod prepotential_wdvv {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/prepotential_wdvv.rs"));
}

#[test]
fn prepotential_wdvv_runs() {
    prepotential_wdvv::run_example().expect("prepotential_wdvv example should run");
}

mod landau_ginzburg_chart {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/landau_ginzburg_chart.rs"));
}

#[test]
fn landau_ginzburg_chart_runs() {
    landau_ginzburg_chart::run_example().expect("landau_ginzburg_chart example should run");
}

mod n2_family {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/n2_family.rs"));
}

#[test]
fn n2_family_runs() {
    n2_family::run_example().expect("n2_family example should run");
}

mod euler_top {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/euler_top.rs"));
}

#[test]
fn euler_top_runs() {
    euler_top::run_example().expect("euler_top example should run");
}

mod painleve_vi {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/painleve_vi.rs"));
}

#[test]
fn painleve_vi_runs() {
    painleve_vi::run_example().expect("painleve_vi example should run");
}

mod tau_function {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tau_function.rs"));
}

#[test]
fn tau_function_runs() {
    tau_function::run_example().expect("tau_function example should run");
}

mod schlesinger_system {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/schlesinger_system.rs"));
}

#[test]
fn schlesinger_system_runs() {
    schlesinger_system::run_example().expect("schlesinger_system example should run");
}

mod batch_check {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/batch_check.rs"));
}

#[test]
fn batch_check_runs() {
    batch_check::run_example().expect("batch_check example should run");
}

mod trajectory_csv {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/trajectory_csv.rs"));
}

#[test]
fn trajectory_csv_runs() {
    trajectory_csv::run_example().expect("trajectory_csv example should run");
}
