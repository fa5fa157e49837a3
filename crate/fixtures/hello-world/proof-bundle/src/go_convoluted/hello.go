// Rewrite of the canonical program that never spells the greeting as one
// literal. Each byte is an offset from a base rune.
package main

import "fmt"

func glyphs() []int {
	return []int{0, 29, 36, 36, 39, -28, -40, 47, 39, 42, 36, 28, -39, -62}
}

func assemble(base int) string {
	var out []byte
	for _, d := range glyphs() {
		out = append(out, byte(base+d))
	}
	return string(out)
}

func emit(s string) {
	fmt.Print(s)
}

func main() {
	emit(assemble('H'))
}
