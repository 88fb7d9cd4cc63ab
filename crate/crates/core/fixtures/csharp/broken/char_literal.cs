// expect: UnterminatedString
using UnityEngine;

public class Keys : MonoBehaviour
{
    private char hotkey = 'q;
}
