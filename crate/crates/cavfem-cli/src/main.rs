fn main() {
    println!("cavfem");
}
