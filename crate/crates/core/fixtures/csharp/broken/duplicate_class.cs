// expect: DuplicateClassName
using UnityEngine;

public class Coin : MonoBehaviour
{
    public int value = 1;
}

public class Coin : MonoBehaviour
{
    public int value = 5;
}
