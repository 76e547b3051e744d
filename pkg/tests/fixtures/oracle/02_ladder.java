class B {
    int grade(int score) {
        if (score > 90) {
            return 2;
        } else if (score > 50) {
            return 1;
        } else {
            return 0;
        }
    }
}
