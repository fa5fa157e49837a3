fn main() {
    print!("Hello, world!\n");
}
