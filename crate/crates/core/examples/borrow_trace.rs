//! Walks one overload episode: the reference cell fills up, borrows from
//! one donor per group, serves a call on a borrowed channel and hands it back.

use cellborrow::borrow::{execute_plan, finish_borrowed_call, plan_borrow};
use cellborrow::cluster::{CellId, ChannelRef, Cluster};

fn show(cluster: &Cluster) {
    for cell in cluster.cells() {
        println!(
            "  {} band {} busy {:>3} free {:>3} lent {:>2} borrowed {:>2}",
            cell.id(),
            cell.band(),
            cell.busy(),
            cell.available(),
            cell.lent(),
            cell.borrowed().len()
        );
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cluster = Cluster::new(100, 70)?;
    let busy = [100, 55, 80, 60, 40, 90, 75];
    for (cell, &n) in CellId::all().zip(&busy) {
        for _ in 0..n {
            cluster.cell_mut(cell).occupy();
        }
    }
    println!("loaded cluster:");
    show(&cluster);

    for cell in CellId::all().skip(1) {
        println!("{cell} can lend {}", cluster.lendable(cell)?);
    }

    let plan = plan_borrow(&cluster, 40);
    println!("plan for 40 channels: {:?}, shortfall {}", plan.grants, plan.shortfall);
    execute_plan(&mut cluster, &plan)?;
    cluster.check_invariants()?;
    println!("after lending:");
    show(&cluster);

    let reference = CellId::REFERENCE;
    let Some(ChannelRef::Borrowed { donor, slot }) = cluster.cell_mut(reference).occupy() else {
        return Err("reference cell should have a borrowed channel free".into());
    };
    println!("call placed on slot {slot} of {donor}");
    finish_borrowed_call(&mut cluster, donor, slot)?;
    cluster.check_invariants()?;
    println!("call ended; {donor} has {} on loan", cluster.on_loan(donor));
    for loan in cluster.ledger() {
        println!("  ledger: {} -> {} x{}", loan.donor, loan.borrower, loan.count);
    }
    Ok(())
}
