public class Hello {
    public static void main(String[] args) {
        // print, not println: the line separator is platform-dependent.
        System.out.print("Hello, world!\n");
        System.out.flush();
    }
}
